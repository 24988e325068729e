#include <iostream>

#include "kmd/cli.hpp"

int main(int argc, char** argv)
{
  return kmd::cli::run(argc, argv, std::cout, std::cerr);
}
