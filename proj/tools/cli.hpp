#pragma once

#include <iosfwd>

namespace recip {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitNotEqual = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
};

// Runs one subcommand. Results go to out, diagnostics to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace recip
