#include <iostream>

#include "revlang/cli.hpp"

int main(int argc, char** argv) { return revlang::run_cli(argc, argv, std::cout, std::cerr); }
