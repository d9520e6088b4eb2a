#pragma once

#include "geognn/graph.hpp"
#include "geognn/tensor.hpp"

#include <string>
#include <vector>

namespace geognn {

/// Default cell-type vocabulary for volume meshes.
std::vector<std::string> default_cell_types();

/// Median of the x and y node coordinates with z pinned to 0. Accepts 2-D
/// positions (treated as z = 0). Even counts average the two middle values.
Eigen::Vector3d reference_point_feature_design(const Matrix& positions);

/// Distinct undirected neighbours per node.
std::vector<Index> compute_node_degree(const Graph& graph);

/// Node features for volume meshes:
///   [x_i - x_ref (3) | L1 norm (1) | cell-type multi-hot (C) | degree (1)]
/// `node_cell_types[i]` lists every cell type node i belongs to.
Matrix encode_nodes_feature_design(const Graph& graph,
                                   const std::vector<std::vector<std::string>>& node_cell_types,
                                   const std::vector<std::string>& vocabulary);

inline Index feature_design_width(std::size_t vocabulary_size) {
  return 5 + static_cast<Index>(vocabulary_size);
}

/// Node features for airfoil surface chains, reference point at the origin:
///   [x_i (2) | upper/lower one-hot (2) | u_0, v_0 (2)]
Matrix encode_nodes_airfoil(const Graph& graph, const std::vector<bool>& upper, double u0, double v0);

inline constexpr Index airfoil_width = 6;

/// Per directed edge j -> i: [x_j - x_i | ||x_j - x_i||_2].
Matrix encode_edges(const Graph& graph);

/// Per-column z-score fitted on training rows. Zero-variance columns keep
/// shift 0 and scale 1 so they pass through unchanged.
class Normalizer {
public:
  Normalizer() = default;
  Normalizer(Vector shift, Vector scale);

  static Normalizer fit(const std::vector<const Matrix*>& matrices);
  static Normalizer fit(const Matrix& matrix);

  bool fitted() const { return fitted_; }
  Index width() const { return shift_.size(); }
  const Vector& shift() const { return shift_; }
  const Vector& scale() const { return scale_; }

  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;

private:
  void require(const Matrix& m) const;

  Vector shift_;
  Vector scale_;
  bool fitted_ = false;
};

/// How the freestream "velocity" divisor is formed for pressure targets.
enum class VelocityDivisor {
  squared_speed,  // u_0^2 + v_0^2
  speed,          // sqrt(u_0^2 + v_0^2)
};

struct PressureNormalized {
  Vector values;       // p / vel - mean(p / vel)
  double mean = 0.0;   // subtracted per-graph mean of p / vel
  double vel = 0.0;
};

PressureNormalized normalize_pressure_target(const Vector& pressure, double u0, double v0,
                                             VelocityDivisor divisor = VelocityDivisor::squared_speed);

Vector denormalize_pressure_target(const Vector& normalized, double mean, double vel);

} // namespace geognn
