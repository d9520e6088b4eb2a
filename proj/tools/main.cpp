#include "geognn/allocator.hpp"
#include "geognn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  geognn::tune_allocator();
  return geognn::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
