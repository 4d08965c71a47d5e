// radius-lab CLI entry point
#include <iostream>
#include <string>
#include <vector>

#include "radiuslab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return radiuslab::cli::run(args, std::cout, std::cerr);
}
