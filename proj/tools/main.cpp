#include <iostream>

#include "lyapfix/commands.hpp"

int main(int argc, char** argv) { return lyapfix::run_cli(argc, argv, std::cout, std::cerr); }
