#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace permadde::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,             // success; permanence certified / verification passed
  kInvalidInput = 1,   // bad flags, unreadable or invalid model, bad parameter path
  kNotCertified = 2,   // bounds not certified, or verification failed
  kSolverFailure = 3,  // integrator lost positivity or produced non-finite values
};

/// Runs one subcommand. `args` excludes the program name. Diagnostics go to
/// `err`; artifacts go to --out files or, when absent, to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permadde::cli
