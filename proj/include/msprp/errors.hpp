#pragma once

#include <stdexcept>
#include <string>

namespace msprp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance / solution / weight text. `field` names the offending
// key when known, `line` is 1-based (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string field = {}, int line = 0)
      : Error(message), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// Data that parses but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A joint action that the environment refuses. Never clamped silently.
class InfeasibleActionError : public Error {
 public:
  InfeasibleActionError(int agent, const std::string& rule)
      : Error("agent " + std::to_string(agent) + ": " + rule), agent_(agent), rule_(rule) {}

  int agent() const { return agent_; }
  const std::string& rule() const { return rule_; }

 private:
  int agent_;
  std::string rule_;
};

// Search / export refused because the input is larger than allowed.
class LimitError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf surfaced in a numeric pipeline.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace msprp
