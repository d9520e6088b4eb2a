#pragma once

#include "geognn/graph.hpp"

#include <optional>
#include <string>

namespace geognn {

/// A featurized graph ready for the model, plus what is needed to map node
/// predictions back to physical units.
struct Sample {
  std::string id;
  Graph graph;  // normalized features; node targets in training scale
  std::optional<Matrix> physical_node_targets;
  // physical = normalized * target_scale + target_shift, per column.
  Vector target_scale;
  Vector target_shift;

  Matrix to_physical(const Matrix& normalized) const {
    if (target_scale.size() == 0) return normalized;
    return ((normalized.array().rowwise() * target_scale.transpose().array()).rowwise() +
            target_shift.transpose().array())
        .matrix();
  }
};

} // namespace geognn
