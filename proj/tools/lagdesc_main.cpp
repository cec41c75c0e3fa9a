#include <iostream>

#include "lagdesc/cli.hpp"

int main(int argc, char** argv) {
  return lagdesc::cli::main(argc, argv, std::cout, std::cerr);
}
