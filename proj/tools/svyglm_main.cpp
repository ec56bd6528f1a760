#include <iostream>

#include "svyglm/cli.hpp"

int main(int argc, char** argv) { return svyglm::cli::run(argc, argv, std::cout, std::cerr); }
