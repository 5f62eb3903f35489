#include <iostream>

#include "cnmt/cli/commands.hpp"

int main(int argc, char** argv) {
    return cnmt::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
