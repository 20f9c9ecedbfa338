#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace decoyrate {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitZeroKey = 3 };

// Entry point of the command-line tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decoyrate
