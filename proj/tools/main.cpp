#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return winnowtc::cli::main_entry({argv, argv + argc}, std::cin, std::cout, std::cerr);
}
