#include <iostream>
#include <string>
#include <vector>

#include "bountylab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bountylab::cli::run(args, std::cout, std::cerr);
}
