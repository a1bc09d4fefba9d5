#include "ensel/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ensel::run_cli(argc, argv, std::cout, std::cerr); }
