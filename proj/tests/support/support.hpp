#pragma once

#include "geognn/featurize.hpp"
#include "geognn/gnn.hpp"
#include "geognn/graph.hpp"
#include "geognn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace geognn::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

/// Random triangulated patch: a fan of triangles over a shuffled node order,
/// so every node sits in at least one cell and the graph is connected.
inline std::vector<std::vector<Index>> random_cells(std::mt19937_64& rng, Index n) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> cells;
  if (n == 2) return {{order[0], order[1]}};
  for (std::size_t k = 2; k < order.size(); ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (b == a) b = (a + 1) % k;
    cells.push_back({order[a], order[b], order[k]});
  }
  return cells;
}

/// Topology plus random features and targets with the given widths.
inline Graph random_graph(std::mt19937_64& rng, Index n, Index dim = 2, Index node_width = 3, Index edge_width = 2,
                          Index target_width = 1, Index graph_target_width = 1) {
  const Matrix pos = random_matrix(rng, n, dim);
  const auto cells = random_cells(rng, n);
  Graph g = build_from_mesh(pos, cells);
  g.node_features = random_matrix(rng, n, node_width);
  g.edge_features = random_matrix(rng, g.num_edges(), edge_width);
  g.node_targets = random_matrix(rng, n, target_width);
  g.graph_target = random_matrix(rng, graph_target_width, 1).col(0);
  return g;
}

inline Graph path_graph(Index n, Index node_width, Index edge_width, std::mt19937_64& rng) {
  Matrix pos(n, 2);
  for (Index i = 0; i < n; ++i) pos.row(i) << static_cast<double>(i), 0.0;
  Graph g = build_surface_chain(pos, false);
  g.node_features = random_matrix(rng, n, node_width);
  g.edge_features = random_matrix(rng, g.num_edges(), edge_width);
  return g;
}

/// Relabels node i as perm[i], carrying every per-node and per-edge array.
inline Graph permute(const Graph& g, const std::vector<Index>& perm) {
  Graph out;
  const Index n = g.num_nodes();
  out.positions.resize(n, g.positions.cols());
  out.node_features.resize(n, g.node_features.cols());
  for (Index i = 0; i < n; ++i) {
    out.positions.row(perm[static_cast<std::size_t>(i)]) = g.positions.row(i);
    out.node_features.row(perm[static_cast<std::size_t>(i)]) = g.node_features.row(i);
  }
  if (g.node_targets) {
    Matrix t(n, g.node_targets->cols());
    for (Index i = 0; i < n; ++i) t.row(perm[static_cast<std::size_t>(i)]) = g.node_targets->row(i);
    out.node_targets = t;
  }
  out.graph_target = g.graph_target;
  out.edges = g.edges;
  for (auto& e : out.edges) {
    e.sender = perm[static_cast<std::size_t>(e.sender)];
    e.receiver = perm[static_cast<std::size_t>(e.receiver)];
  }
  out.edge_features = g.edge_features;
  sort_edges(out);
  return out;
}

inline std::vector<Index> random_permutation(std::mt19937_64& rng, Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline GnnConfig tiny_config(Index node_in, Index edge_in, TaskMode task = TaskMode::node_level, Index latent = 8,
                             Index steps = 2, Index depth = 2, Index width = 8) {
  GnnConfig c;
  c.node_input_size = node_in;
  c.edge_input_size = edge_in;
  c.latent_size = latent;
  c.steps = steps;
  c.encoder = c.processor = c.graph_decoder = c.node_decoder = MlpShape{depth, width};
  c.graph_output_size = task == TaskMode::node_level ? 4 : 1;
  c.node_output_size = 1;
  c.task = task;
  return c;
}

/// Relative error with a floor on the denominator so that entries whose
/// true gradient is zero are judged by their absolute error.
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central differences of `f` with respect to every entry of `blocks`,
/// step h = step_scale * max(1, |theta|).
inline std::vector<double> central_differences(const std::function<double()>& f,
                                               const std::vector<std::span<double>>& blocks,
                                               double step_scale = 1e-6) {
  std::vector<double> out;
  for (auto block : blocks) {
    for (double& theta : block) {
      const double saved = theta;
      const double h = step_scale * std::max(1.0, std::abs(saved));
      theta = saved + h;
      const double up = f();
      theta = saved - h;
      const double down = f();
      theta = saved;
      out.push_back((up - down) / (2.0 * h));
    }
  }
  return out;
}

inline std::vector<double> flatten(const std::vector<std::span<const double>>& blocks) {
  std::vector<double> out;
  for (auto b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

} // namespace geognn::testing
