#include <iostream>

#include "moebius_flux/cli.hpp"

int main(int argc, char** argv) { return mflux::run_cli(argc, argv, std::cout, std::cerr); }
