#include <iostream>

#include "svwhf/cli.hpp"

int main(int argc, char** argv) { return svwhf::cli::run(argc, argv, std::cout); }
