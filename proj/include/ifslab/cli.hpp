#pragma once

#include <iosfwd>

namespace ifslab::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kNumericError = 3,
  kDegenerate = 4,
};

/// Runs `ifslab <command> ...` and returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace ifslab::cli
