#include <iostream>

#include "squit/cli.hpp"

int main(int argc, char** argv) { return squit::run_cli(argc, argv, std::cout, std::cerr); }
