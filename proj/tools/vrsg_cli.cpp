#include <iostream>

#include "vrsg/harness.hpp"

int main(int argc, char** argv) { return vrsg::harness::run_cli(argc, argv, std::cout, std::cerr); }
