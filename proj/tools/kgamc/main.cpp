#include <iostream>

#include "kgamc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return kgamc::cli::run(args, std::cout, std::cerr);
}
