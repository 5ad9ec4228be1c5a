#include <iostream>

#include "wormhole/cli.hpp"

int main(int argc, char** argv) { return wormhole::cli::main(argc, argv, std::cout, std::cerr); }
