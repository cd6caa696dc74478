#include <iostream>
#include <string>
#include <vector>

#include "tnt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tnt::cli::run(args, std::cout, std::cerr);
}
