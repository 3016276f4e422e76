#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roadnav::cli {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitAssert = 3 };

// Full command line minus the program name, e.g. {"gen-world", "--seed", "1"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// argv entry point.
int run_main(int argc, char** argv);

}  // namespace roadnav::cli
