#include <iostream>

#include "limsim/cli.hpp"

int main(int argc, char** argv) {
    return limsim::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
