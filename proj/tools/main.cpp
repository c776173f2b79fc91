#include <iostream>
#include <string>
#include <vector>

#include "titledup/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return titledup::cli::run(args, std::cout, std::cerr);
}
