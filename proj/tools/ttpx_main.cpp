#include "ttpx/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return ttpx::cli::run_cli(argc, argv, std::cout, std::cerr); }
