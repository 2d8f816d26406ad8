#include <iostream>

#include "gridclear/app.hpp"

int main(int argc, char** argv) { return gridclear::run(argc, argv, std::cout, std::cerr); }
