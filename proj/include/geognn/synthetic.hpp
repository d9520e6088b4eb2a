#pragma once

#include "geognn/record.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geognn {

enum class GeometryFamily {
  chain,    // airfoil-like 2-D surface chains with a freestream condition
  patch2d,  // jittered 2-D grids of triangles and quads
  patch3d,  // jittered 3-D blocks of hex, wedge and tet cells
};

const char* to_string(GeometryFamily family);
GeometryFamily geometry_family_from_string(const std::string& name);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  Index count = 1;
  Index min_nodes = 20;
  Index max_nodes = 60;
  GeometryFamily family = GeometryFamily::chain;
  bool closed = true;  // chain family only
  std::string id_prefix = "g";
};

/// Closed-form node target. Chain family:
///   sin(2 pi x) cos(2 pi y) + 0.5 (u_0 x + v_0 y)
/// Patch families (no freestream):
///   sin(2 pi x) cos(2 pi y) exp(-z)
double synthetic_node_target(double x, double y, double z, double u0, double v0);

/// Deterministic dataset of `count` graphs. Each record carries the node
/// target field and its mean over the graph as the graph target.
std::vector<GraphRecord> generate_synthetic(const SyntheticSpec& spec);

} // namespace geognn
