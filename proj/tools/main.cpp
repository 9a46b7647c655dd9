#include <iostream>
#include <string>
#include <vector>

#include "aadt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return aadt::cli::run(args, std::cout, std::cerr);
}
