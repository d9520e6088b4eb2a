#include "sine_kernels.hpp"

#include <cmath>

namespace geognn::detail {

void sine_in_place(double* z, std::size_t n, double w) {
  for (std::size_t i = 0; i < n; ++i) z[i] = std::sin(w * z[i]);
}

void scale_by_sine_derivative(double* __restrict g, const double* __restrict z, std::size_t n, double w) {
  for (std::size_t i = 0; i < n; ++i) g[i] *= w * std::cos(w * z[i]);
}

} // namespace geognn::detail
