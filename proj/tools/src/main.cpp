#include <iostream>

#include "kairos/cli.hpp"

int main(int argc, char** argv) {
  return kairos::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
