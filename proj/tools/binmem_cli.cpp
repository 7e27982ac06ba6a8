#include <iostream>

#include "binmem/cli.hpp"

int main(int argc, char** argv) { return binmem::cli::run_cli(argc, argv, std::cout, std::cerr); }
