#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tpaug {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitArgument = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

/// Runs one subcommand. `args[0]` is the program name. Results go to `out`;
/// failures produce a single-line diagnostic on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tpaug
