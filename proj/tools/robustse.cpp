#include <iostream>

#include "robustse/cli.hpp"

int main(int argc, char** argv) {
  return robustse::cli::run(argc, argv, std::cout, std::cerr);
}
