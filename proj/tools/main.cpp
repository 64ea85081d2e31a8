#include "capsim/cli.h"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char **argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return capsim::cli_run(args, std::cout, std::cerr);
}
