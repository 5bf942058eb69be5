#include <iostream>

#include "loadgen/cli.hpp"

int main(int argc, char** argv) { return loadgen::run_cli(argc, argv, std::cout, std::cerr); }
