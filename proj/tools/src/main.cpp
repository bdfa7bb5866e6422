#include <iostream>
#include <string>
#include <vector>

#include "qjudge_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qjudge::cli::run(args, std::cout, std::cerr);
}
