#include <iostream>
#include <string>
#include <vector>

#include "dhs/cli.hpp"

int main(int argc, char** argv) {
  return dhs::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
