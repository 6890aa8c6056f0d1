#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msprp::cli {

enum ExitCode { kOk = 0, kFailed = 1, kUsage = 2, kInternal = 3 };

// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msprp::cli
