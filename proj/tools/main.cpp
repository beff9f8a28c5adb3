#include <iostream>

#include "wibg/cli.hpp"

int main(int argc, char** argv) { return wibg::run_cli(argc, argv, std::cout, std::cerr); }
