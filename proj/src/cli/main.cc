#include <iostream>

#include "roadnav/cli/commands.h"

namespace roadnav::cli {

int run_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace roadnav::cli
