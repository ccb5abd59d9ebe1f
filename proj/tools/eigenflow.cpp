#include <iostream>
#include <string>
#include <vector>

#include "eigenflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eigenflow::run_cli(args, std::cout, std::cerr);
}
