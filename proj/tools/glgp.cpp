#include "glgp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return glgp::run_cli(argc, argv, std::cout, std::cerr); }
