#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "geognn/allocator.hpp"

int main(int argc, char** argv) {
  geognn::tune_allocator();
  doctest::Context context(argc, argv);
  return context.run();
}
