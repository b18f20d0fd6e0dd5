#include <iostream>

#include "adkit/cli.hpp"

int main(int argc, char** argv) { return adkit::cli_dispatch(argc, argv, std::cout, std::cerr); }
