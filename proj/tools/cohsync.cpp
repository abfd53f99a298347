#include <iostream>

#include "cohsync/cli.hpp"

int main(int argc, char** argv) { return cohsync::cli_main(argc, argv, std::cout, std::cerr); }
