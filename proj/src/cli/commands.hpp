#pragma once

#include <iosfwd>

namespace npde::cli {

/// Exit codes of the command-line runner.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // I/O or other runtime failure
  kInvalidConfig = 2, // usage or configuration error
  kDiverged = 3,      // a state went non-finite
};

/// Entry point shared by the `npde` binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace npde::cli
