#include <iostream>

#include "idw/cli.hpp"

int main(int argc, char** argv) { return idw::cli::run(argc, argv, std::cout, std::cerr); }
