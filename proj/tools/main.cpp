// main.cpp — lindblad-resign executable

#include <iostream>
#include <string>
#include <vector>

#include "resign/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return resign::cli::run(args, std::cout, std::cerr);
}
