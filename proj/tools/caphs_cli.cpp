#include <iostream>

#include "caphs/cli.hpp"

int main(int argc, char** argv) { return caphs::cli::run(argc, argv, std::cout, std::cerr); }
