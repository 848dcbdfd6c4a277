#include <iostream>
#include <string>
#include <vector>

#include "robustcalib/cli.hpp"

int main(int argc, char** argv) {
  return robustcalib::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
