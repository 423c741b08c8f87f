#include <vector>
#include <string>

#include "qlr/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qlr::run_cli(args);
}
