#include <spiralflow/cli.hpp>

int main(int argc, char** argv) {
    return spiralflow::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
