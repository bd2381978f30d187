#include <iostream>

#include "resbal/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return resbal::run_cli(args, std::cout, std::cerr);
}
