#include <iostream>
#include <string>
#include <vector>

#include "ragig/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ragig::cli::run(args, std::cout, std::cerr);
}
