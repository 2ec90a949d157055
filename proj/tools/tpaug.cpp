#include <iostream>
#include <string>
#include <vector>

#include "tpaug/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tpaug::run_command(args, std::cout, std::cerr);
}
