#pragma once

#include "geognn/tensor.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace geognn {

/// Airfoil surface from a Selig-format coordinate file.
struct SeligAirfoil {
  std::string name;
  Matrix points;               // N x 2, file order
  Index leading_edge = 0;      // index of the minimum-x point
  std::vector<bool> upper;     // true for points up to and including the leading edge
};

/// Parses "name line, then one `x y` pair per non-empty line". Points are
/// checked against x in [-0.01, 1.01]. Points before the leading edge (the
/// minimum-x point) are upper surface, points after it lower surface; the
/// leading edge itself is counted as upper.
SeligAirfoil parse_selig(std::string_view text);
SeligAirfoil read_selig(const std::filesystem::path& path);

} // namespace geognn
