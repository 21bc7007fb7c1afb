#include <iostream>

#include "rdbp/cli.hpp"

int main(int argc, char** argv) { return rdbp::run_cli(argc, argv, std::cout, std::cerr); }
