#include "kacrice/cli/runner.hpp"

int main(int argc, char** argv) { return kacrice::cli::main_entry(argc, argv); }
