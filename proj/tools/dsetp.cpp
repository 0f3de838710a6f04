#include <iostream>

#include "dsetp/commands.hpp"

int main(int argc, char** argv) { return dsetp::run_cli(argc, argv, std::cout, std::cerr); }
