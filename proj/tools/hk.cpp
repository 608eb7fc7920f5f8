#include "hk/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return hk::cli::run(argc, argv, std::cout, std::cerr); }
