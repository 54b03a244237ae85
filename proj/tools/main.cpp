/// @file main.cpp
/// @brief Entry point of the `hybrid` command-line tool.

#include "hybrid/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hybrid::cli::run(argc, argv, std::cout, std::cerr); }
