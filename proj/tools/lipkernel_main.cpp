#include "lipkernel/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lipkernel::run_cli(argc, argv, std::cout, std::cerr); }
