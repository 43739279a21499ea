#include <iostream>

#include "phaseflow/cli.hpp"

int main(int argc, char** argv) { return phaseflow::cli_main(argc, argv, std::cout, std::cerr); }
