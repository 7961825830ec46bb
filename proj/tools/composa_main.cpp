#include <iostream>

#include "composa/cli.hpp"

int main(int argc, char** argv) { return composa::run_cli(argc, argv, std::cout, std::cerr); }
