#include <iostream>

#include "mrflearn/cli.hpp"

int main(int argc, char** argv) { return mrflearn::run_cli(argc, argv, std::cout, std::cerr); }
