#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subsil {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitInternal = 3,
    kExitThreshold = 4,  // eval finished but a configured threshold was missed
};

// Runs one command line (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace subsil
