#include <iostream>
#include <string>
#include <vector>

#include "emscore/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return emscore::cli::run(args, std::cout, std::cerr);
}
