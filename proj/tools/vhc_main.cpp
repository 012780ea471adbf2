#include <iostream>

#include "vhc/cli.hpp"

int main(int argc, char** argv) { return vhc::run_cli(argc, argv, std::cout, std::cerr); }
