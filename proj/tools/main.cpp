#include <iostream>
#include <string>
#include <vector>

#include "spinsense/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spinsense::run_command(args, std::cout, std::cerr);
}
