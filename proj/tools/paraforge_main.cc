#include <iostream>
#include <string>
#include <vector>

#include "paraforge/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return paraforge::run_cli(args, std::cout, std::cerr);
}
