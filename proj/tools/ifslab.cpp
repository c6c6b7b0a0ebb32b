#include "ifslab/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return ifslab::cli::run(argc, argv, std::cout, std::cerr); }
