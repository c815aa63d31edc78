#include <iostream>
#include <string>
#include <vector>

#include "spinref/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spinref::run_command(args, std::cout, std::cerr);
}
