#include <iostream>

#include "netreduce/cli.hpp"

int main(int argc, char** argv) { return netreduce::run_cli(argc, argv, std::cout, std::cerr); }
