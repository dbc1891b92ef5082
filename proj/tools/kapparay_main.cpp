#include <iostream>

#include "kapparay/cli.hpp"

int main(int argc, char** argv) {
    return kapparay::run_cli(argc, argv, std::cout, std::cerr);
}
