#include <iostream>

#include "spotter/cli.hpp"

int main(int argc, char** argv) { return spotter::run_cli(argc, argv, std::cout, std::cerr); }
