#include "krein/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return krein::run_command(argc, argv, std::cout, std::cerr); }
