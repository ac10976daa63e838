#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spinsense {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitInstability = 3,
  kExitIo = 4,
};

/// Runs one subcommand. args excludes the program name. CSV files go to the
/// --output directory, summaries to out, diagnostics to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinsense
