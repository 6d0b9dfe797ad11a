#include <iostream>

#include "sievectl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sievectl::run(args, std::cout, std::cerr);
}
