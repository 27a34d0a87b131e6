#include <iostream>

#include "omtk/cli.hpp"

int main(int argc, char** argv) { return omtk::run_cli(argc, argv, std::cout, std::cerr); }
