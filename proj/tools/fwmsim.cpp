#include <iostream>

#include "fwm/cli/app.hpp"

int main(int argc, char** argv) { return fwm::cli::run(argc, argv, std::cout, std::cerr); }
