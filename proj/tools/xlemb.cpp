#include <iostream>

#include "xlemb/cli.hpp"

int main(int argc, char** argv) { return xlemb::cli::run_cli(argc, argv, std::cout, std::cerr); }
