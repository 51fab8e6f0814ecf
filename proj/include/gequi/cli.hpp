#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gequi::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitExact = 0,
  kExitInexact = 1,
  kExitUsage = 2,
};

/// Runs one command line (args excludes the program name). Reports go to `out`
/// unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color = false);

}  // namespace gequi::cli
