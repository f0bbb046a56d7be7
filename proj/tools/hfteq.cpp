#include <iostream>

#include "hfteq/cli.hpp"

int main(int argc, char** argv) { return hfteq::cli::run(argc, argv, std::cout, std::cerr); }
