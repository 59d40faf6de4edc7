#include <iostream>

#include "copra/cli.hpp"

int main(int argc, char** argv) {
    return copra::run_cli(argc, argv, std::cout, std::cerr);
}
