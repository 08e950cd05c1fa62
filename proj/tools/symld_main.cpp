#include "../src/cli/runner.hpp"

int main(int argc, char** argv) { return symld::cli::main_with_args(argc, argv); }
