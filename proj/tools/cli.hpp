#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace keyscope::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kUsageError = 2,
  kDataError = 3,
};

/// Runs the command line `args` (without the program name) and returns the exit
/// status. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace keyscope::cli
