#include <iostream>
#include <string>
#include <vector>

#include "mnar_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mnar::cli::run(args, std::cout, std::cerr);
}
