// Command-line front end. Exit codes: 0 success, 1 unexpected error,
// 2 usage or precondition failure, 3 sampler failure, 4 cache write failure,
// 5 a validation check failed.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fbmlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitSampler = 3,
  kExitCacheWrite = 4,
  kExitValidation = 5,
};

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbmlab
