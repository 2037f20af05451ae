#pragma once

#include <ostream>

namespace probedesign {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitSolver = 4,
  kExitIo = 5,
};

/// Entry point of the `probedesign` executable. Errors are reported on `err`
/// as a single JSON object with "error" and "reason" keys.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace probedesign
