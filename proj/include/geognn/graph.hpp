#pragma once

#include "geognn/tensor.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geognn {

/// Directed edge carrying a message from `sender` (j) to `receiver` (i).
struct Edge {
  Index sender = 0;
  Index receiver = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// A simulation mesh or surface chain as a bidirectional graph.
///
/// Edges are kept sorted by (receiver, sender) so that incoming-edge
/// aggregation is a contiguous scan over the edge list.
struct Graph {
  Matrix positions;                    // N x D
  std::vector<Edge> edges;             // E
  Matrix node_features;                // N x d_v
  Matrix edge_features;                // E x d_e
  std::optional<Matrix> node_targets;  // N x d_y
  std::optional<Vector> graph_target;  // d_g

  Index num_nodes() const { return positions.rows(); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }
  Index dim() const { return positions.cols(); }
};

/// Contiguous node range of one member graph inside a batch.
struct Segment {
  Index start = 0;
  Index length = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Disjoint union of member graphs, used for one forward/backward pass.
struct BatchedGraph {
  Graph graph;
  std::vector<Segment> segments;
  // Edge range per member, parallel to `segments`.
  std::vector<Segment> edge_segments;
};

/// Topology from mesh cells. Each cell is an ordered node tuple whose
/// consecutive pairs (plus the closing pair when it has 3 or more nodes)
/// are its boundary edges. Shared edges are deduplicated.
Graph build_from_mesh(const Matrix& positions, std::span<const std::vector<Index>> cells);

/// Topology of an ordered chain of surface points; `closed` joins the last
/// point back to the first.
Graph build_surface_chain(const Matrix& positions, bool closed);

/// Sorts edges by (receiver, sender), permuting edge_features alongside.
void sort_edges(Graph& graph);

BatchedGraph merge_batch(std::span<const Graph> graphs);
BatchedGraph merge_batch(std::span<const Graph* const> graphs);

/// Recovers member `index` of a batch.
Graph extract_member(const BatchedGraph& batch, std::size_t index);

struct Violation {
  enum class Kind {
    edge_out_of_range,
    self_loop,
    duplicate_edge,
    missing_reverse_edge,
    node_feature_rows,
    edge_feature_rows,
    node_target_rows,
  };
  Kind kind;
  Index location;  // edge index or row
  std::string message;
};

/// Every violated graph invariant; an empty list means the graph is valid.
std::vector<Violation> validate(const Graph& graph);

} // namespace geognn
