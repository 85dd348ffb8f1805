#include <iostream>

#include "robustprice/cli.hpp"

int main(int argc, char** argv) { return robustprice::cli::run(argc, argv, std::cout, std::cerr); }
