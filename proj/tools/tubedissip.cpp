#include "tubedissip/cli.hpp"

#include <iostream>

int main(int argc, char ** argv) { return tubedissip::run(argc, argv, std::cout, std::cerr); }
