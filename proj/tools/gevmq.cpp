#include <iostream>

#include "gevmq/cli.hpp"

int main(int argc, char** argv) { return gevmq::run_cli(argc, argv, std::cout, std::cerr); }
