#include <iostream>

#include "ppv/cli.hpp"

int main(int argc, char** argv) { return ppv::cli::run(argc, argv, std::cout, std::cerr); }
