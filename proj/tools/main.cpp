#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  flare::cli::init_logging();
  std::vector<std::string> args(argv + 1, argv + argc);
  return flare::cli::run(args, std::cout, std::cerr);
}
