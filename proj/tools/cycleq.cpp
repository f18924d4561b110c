#include <iostream>

#include "cycleq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cycleq::run(args, std::cout, std::cerr);
}
