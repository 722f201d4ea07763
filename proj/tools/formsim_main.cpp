#include <string>
#include <vector>

#include "formsim/cli.hpp"

int main(int argc, char** argv) {
    return formsim::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
