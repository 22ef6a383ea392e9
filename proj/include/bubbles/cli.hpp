#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bubbles {

/// Process exit codes.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitFailure = 1,          // numerical or internal failure
  kExitConfig = 2,           // usage, config or model-class error
  kExitNonConvergence = 3,   // iteration cap reached
  kExitCertificate = 4,      // declared certificate or solver hypothesis rejected
};

/// Entry point of the `bubbles` tool; args excludes the program name.
/// Subcommands: kernel-report, solve-default, simulate, iid-check, bessel.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bubbles
