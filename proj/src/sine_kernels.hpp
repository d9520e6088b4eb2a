#pragma once

#include <cstddef>

namespace geognn::detail {

// z[i] = sin(w * z[i]). Built in its own translation unit so the loop maps
// onto the vector math library; results are deterministic for one binary.
void sine_in_place(double* z, std::size_t n, double w);

// g[i] *= w * cos(w * z[i])
void scale_by_sine_derivative(double* g, const double* z, std::size_t n, double w);

} // namespace geognn::detail
