#include "ddgrape/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ddgrape::run_cli(argc, argv, std::cout, std::cerr); }
