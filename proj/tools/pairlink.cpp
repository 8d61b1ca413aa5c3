#include "pairlink/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return pairlink::cli::run(argc, argv, std::cout, std::cerr);
}
