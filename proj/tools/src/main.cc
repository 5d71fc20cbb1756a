#include <iostream>
#include <string>
#include <vector>

#include "lqgopt_cli/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lqgopt::cli::RunCli(args, std::cout, std::cerr);
}
