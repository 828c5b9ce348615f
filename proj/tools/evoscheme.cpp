#include <iostream>
#include <string>
#include <vector>

#include "evoscheme/cli/dispatch.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return evoscheme::cli::run_cli(args, std::cout, std::cerr);
}
