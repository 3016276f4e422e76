#include "roadnav/cli/commands.h"

int main(int argc, char** argv) { return roadnav::cli::run_main(argc, argv); }
