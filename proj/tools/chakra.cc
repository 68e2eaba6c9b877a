#include <iostream>
#include <string>
#include <vector>

#include "chakra/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return chakra::run(args, std::cout, std::cerr);
}
