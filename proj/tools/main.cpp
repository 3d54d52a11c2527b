#include <iostream>

#include "bayesqa/cli.hpp"

int main(int argc, char** argv) { return bayesqa::run_cli(argc, argv, std::cout, std::cerr); }
