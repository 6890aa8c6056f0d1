#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "msprp/env.hpp"
#include "msprp/instance.hpp"
#include "msprp/select.hpp"

namespace msprp {

// A decoding policy factorized into a shelf stage and an SKU stage. Shapes:
// M x (|V| + 1) and M x (|P| + 1), sentinel columns last. Implementations
// must be callable concurrently on distinct states.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual LogitMatrix shelf_logits(const State& s) const = 0;
  virtual LogitMatrix sku_logits(const State& s_prime) const = 0;
};

struct GreedyParams {
  double epsilon = 1e-6;
  // Multiplies every logit (inverse temperature of the policy itself).
  double sharpness = 1.0;
  friend bool operator==(const GreedyParams&, const GreedyParams&) = default;
};

// Stochastic baseline: shelves weighted by inverse distance, SKUs by the
// number of units the agent could pick.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(GreedyParams params = {}) : params_(params) {}

  std::string name() const override { return "greedy"; }
  LogitMatrix shelf_logits(const State& s) const override;
  LogitMatrix sku_logits(const State& s_prime) const override;

  const GreedyParams& params() const { return params_; }

 private:
  GreedyParams params_;
};

struct DecodeConfig {
  double temperature = 1.0;
  DecodeMode mode = DecodeMode::Sample;
  std::uint64_t seed = 0;
  EnvOptions env;
};

// One construction step: both selections plus what the environment did.
struct StepRecord {
  JointAction action;
  std::vector<int> shelf_order;
  std::vector<int> shelf_drawn;  // shelf-stage drawn actions (pre-override), per agent
  int shelf_override = -1;
  std::vector<int> sku_order;
  std::vector<int> pick_order;  // complete permutation used for quantities
  std::vector<int> locations;   // resolved locations after the move
  std::vector<int> quantities;
  double log_prob = 0.0;
};

struct SolutionMeta {
  std::string policy;
  std::string decode;
  std::uint64_t seed = 0;
  int samples = 1;
  double seconds = 0.0;
};

struct Solution {
  std::string instance_id;
  std::vector<StepRecord> steps;
  std::vector<std::vector<int>> tours;
  double objective = 0.0;
  double total_distance = 0.0;
  double log_prob = 0.0;
  SolutionMeta meta;

  double reward() const { return -objective; }
};

// Step budget enforced by rollout: 10 * (M + total demand).
int step_budget(const Instance& inst);

Solution rollout(const Policy& policy, std::shared_ptr<const Instance> inst, const DecodeConfig& cfg);

// Best of `samples` rollouts (ties: first found). Sample i uses seed
// cfg.seed ^ (i * golden); sample 0 is exactly rollout(cfg).
Solution sample_best(const Policy& policy, std::shared_ptr<const Instance> inst, int samples,
                     const DecodeConfig& cfg);

std::uint64_t sample_seed(std::uint64_t base, int index);

// Solution file (JSON text, schema "msprp-solution-v1").
std::string write_solution(const Solution& sol);
Solution read_solution(std::string_view text);

}  // namespace msprp
