#include <iostream>

#include "bsderep_cli/commands.hpp"

int main(int argc, char** argv) { return bsderep::cli::run_cli(argc, argv, std::cout, std::cerr); }
