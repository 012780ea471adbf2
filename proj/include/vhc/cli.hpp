#pragma once

#include <iosfwd>

namespace vhc {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitLagrangian = 0,  // also plain success for non-analysis commands
  kExitError = 1,
  kExitUnsupported = 2,
  kExitNotLagrangian = 3,
};

/// Entry point of `vhc analyze | simulate | holonomy | portrait`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vhc
