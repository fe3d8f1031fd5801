#include <iostream>

#include "sxcad_cli/cli.hpp"

int main(int argc, char** argv) { return sxcad::cli::run(argc, argv, std::cout, std::cerr); }
