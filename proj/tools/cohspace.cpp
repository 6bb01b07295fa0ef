#include <iostream>
#include <string>
#include <vector>

#include "cohspace/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cohspace::run_cli(args, std::cout, std::cerr);
}
