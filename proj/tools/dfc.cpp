#include <iostream>

#include "dfc/cli.hpp"

int main(int argc, char** argv) { return dfc::cli_main(argc, argv, std::cout, std::cerr); }
