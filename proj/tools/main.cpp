#include <iostream>

#include "delaybounds/cli.hpp"

int main(int argc, char** argv) {
    return dbounds::run_cli(argc, argv, std::cout, std::cerr);
}
