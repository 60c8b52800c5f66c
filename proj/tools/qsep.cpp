#include "qsep/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qsep::cli::run(argc, argv, std::cout, std::cerr); }
