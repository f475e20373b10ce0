#include "refgraph/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return refgraph::cli::run(argc, argv, std::cout, std::cerr);
}
