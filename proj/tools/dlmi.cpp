#include "dlmi/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return dlmi::run_cli(argc, argv, std::cout, std::cerr);
}
