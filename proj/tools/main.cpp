#include <iostream>
#include <string>
#include <vector>

#include "bemflow/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bemflow::app::run_cli(args, std::cout, std::cerr);
}
