#include <iostream>

#include "probedesign/cli.hpp"

int main(int argc, char** argv) {
  return probedesign::run_cli(argc, argv, std::cout, std::cerr);
}
