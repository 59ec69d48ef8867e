#include <iostream>

#include "eht/commands.hpp"

int main(int argc, char** argv) { return eht::run_cli(argc, argv, std::cout, std::cerr); }
