#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resbal {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitChecksFailed = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

// Runs the tool on `args` (without the program name). Results go to `out`,
// messages and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count used when --jobs is not given: RESBAL_JOBS if set, else 1.
int default_jobs();

}  // namespace resbal
