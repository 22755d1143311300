#include <iostream>

#include "selftune/harness.hpp"

int main(int argc, char** argv) { return selftune::run_cli(argc, argv, std::cout, std::cerr); }
