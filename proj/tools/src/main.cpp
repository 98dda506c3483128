#include <iostream>

#include "aeattack/cli/commands.hpp"

int main(int argc, char** argv) { return aeattack::cli::run(argc, argv, std::cout, std::cerr); }
