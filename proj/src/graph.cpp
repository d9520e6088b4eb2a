#include "geognn/graph.hpp"

#include "geognn/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>

namespace geognn {

namespace {

bool edge_order(const Edge& a, const Edge& b) {
  return std::tie(a.receiver, a.sender) < std::tie(b.receiver, b.sender);
}

Graph from_undirected(const Matrix& positions, std::set<std::pair<Index, Index>> undirected) {
  Graph g;
  g.positions = positions;
  g.edges.reserve(undirected.size() * 2);
  for (const auto& [a, b] : undirected) {
    g.edges.push_back({a, b});
    g.edges.push_back({b, a});
  }
  std::sort(g.edges.begin(), g.edges.end(), edge_order);
  g.node_features.resize(positions.rows(), 0);
  g.edge_features.resize(static_cast<Index>(g.edges.size()), 0);
  return g;
}

} // namespace

Graph build_from_mesh(const Matrix& positions, std::span<const std::vector<Index>> cells) {
  const Index n = positions.rows();
  std::set<std::pair<Index, Index>> undirected;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    if (cell.size() < 2) {
      throw Error(ErrorKind::invalid_mesh,
                  "cell " + std::to_string(c) + " has fewer than 2 nodes");
    }
    for (Index v : cell) {
      if (v < 0 || v >= n) {
        throw Error(ErrorKind::invalid_mesh, "cell " + std::to_string(c) + " references node " +
                                                 std::to_string(v) + " but the mesh has " +
                                                 std::to_string(n) + " nodes");
      }
    }
    const std::size_t k = cell.size();
    // A 2-node cell is a single segment; larger cells are closed polygons.
    const std::size_t pairs = k == 2 ? 1 : k;
    for (std::size_t p = 0; p < pairs; ++p) {
      Index a = cell[p];
      Index b = cell[(p + 1) % k];
      if (a == b) continue;
      undirected.insert(std::minmax(a, b));
    }
  }
  return from_undirected(positions, std::move(undirected));
}

Graph build_surface_chain(const Matrix& positions, bool closed) {
  const Index n = positions.rows();
  if (n < 2) {
    throw Error(ErrorKind::invalid_chain,
                "surface chain needs at least 2 points, got " + std::to_string(n));
  }
  std::set<std::pair<Index, Index>> undirected;
  for (Index k = 0; k + 1 < n; ++k) undirected.insert({k, k + 1});
  if (closed && n > 2) undirected.insert({0, n - 1});
  return from_undirected(positions, std::move(undirected));
}

void sort_edges(Graph& graph) {
  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edge_order(graph.edges[a], graph.edges[b]);
  });
  std::vector<Edge> edges(graph.edges.size());
  Matrix features(graph.edge_features.rows(), graph.edge_features.cols());
  const bool has_features = graph.edge_features.rows() == graph.num_edges();
  for (std::size_t k = 0; k < order.size(); ++k) {
    edges[k] = graph.edges[order[k]];
    if (has_features) features.row(static_cast<Index>(k)) = graph.edge_features.row(static_cast<Index>(order[k]));
  }
  graph.edges = std::move(edges);
  if (has_features) graph.edge_features = std::move(features);
}

BatchedGraph merge_batch(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  return merge_batch(std::span<const Graph* const>(ptrs));
}

BatchedGraph merge_batch(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw Error(ErrorKind::incompatible_graphs, "cannot merge an empty batch");

  const Graph& first = *graphs.front();
  Index total_nodes = 0;
  Index total_edges = 0;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    auto mismatch = [&](const char* what) {
      throw Error(ErrorKind::incompatible_graphs,
                  "graph " + std::to_string(k) + " has a different " + what + " than graph 0");
    };
    if (g.dim() != first.dim()) mismatch("spatial dimension");
    if (g.node_features.cols() != first.node_features.cols()) mismatch("node feature width");
    if (g.edge_features.cols() != first.edge_features.cols()) mismatch("edge feature width");
    if (g.node_targets.has_value() != first.node_targets.has_value() ||
        (g.node_targets && g.node_targets->cols() != first.node_targets->cols())) {
      mismatch("node target arity");
    }
    if (g.graph_target.has_value() != first.graph_target.has_value() ||
        (g.graph_target && g.graph_target->size() != first.graph_target->size())) {
      mismatch("graph target arity");
    }
    total_nodes += g.num_nodes();
    total_edges += g.num_edges();
  }

  BatchedGraph batch;
  Graph& out = batch.graph;
  out.positions.resize(total_nodes, first.dim());
  out.node_features.resize(total_nodes, first.node_features.cols());
  out.edge_features.resize(total_edges, first.edge_features.cols());
  out.edges.reserve(static_cast<std::size_t>(total_edges));
  if (first.node_targets) out.node_targets = Matrix(total_nodes, first.node_targets->cols());
  if (first.graph_target) {
    // Graph targets are stacked per member: d_g entries each.
    out.graph_target = Vector(first.graph_target->size() * static_cast<Index>(graphs.size()));
  }

  Index node_offset = 0;
  Index edge_offset = 0;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    const Index n = g.num_nodes();
    const Index e = g.num_edges();
    out.positions.middleRows(node_offset, n) = g.positions;
    out.node_features.middleRows(node_offset, n) = g.node_features;
    out.edge_features.middleRows(edge_offset, e) = g.edge_features;
    if (g.node_targets) out.node_targets->middleRows(node_offset, n) = *g.node_targets;
    if (g.graph_target) {
      const Index d = g.graph_target->size();
      out.graph_target->segment(static_cast<Index>(k) * d, d) = *g.graph_target;
    }
    for (const Edge& edge : g.edges) {
      out.edges.push_back({edge.sender + node_offset, edge.receiver + node_offset});
    }
    batch.segments.push_back({node_offset, n});
    batch.edge_segments.push_back({edge_offset, e});
    node_offset += n;
    edge_offset += e;
  }
  // Member edge lists are sorted and node offsets increase, so the merged
  // list is already in (receiver, sender) order.
  return batch;
}

Graph extract_member(const BatchedGraph& batch, std::size_t index) {
  const Segment nodes = batch.segments.at(index);
  const Segment edges = batch.edge_segments.at(index);
  const Graph& src = batch.graph;
  Graph g;
  g.positions = src.positions.middleRows(nodes.start, nodes.length);
  g.node_features = src.node_features.middleRows(nodes.start, nodes.length);
  g.edge_features = src.edge_features.middleRows(edges.start, edges.length);
  if (src.node_targets) g.node_targets = Matrix(src.node_targets->middleRows(nodes.start, nodes.length));
  if (src.graph_target) {
    const Index d = src.graph_target->size() / static_cast<Index>(batch.segments.size());
    g.graph_target = Vector(src.graph_target->segment(static_cast<Index>(index) * d, d));
  }
  g.edges.reserve(static_cast<std::size_t>(edges.length));
  for (Index k = 0; k < edges.length; ++k) {
    const Edge& e = src.edges[static_cast<std::size_t>(edges.start + k)];
    g.edges.push_back({e.sender - nodes.start, e.receiver - nodes.start});
  }
  return g;
}

std::vector<Violation> validate(const Graph& graph) {
  std::vector<Violation> out;
  const Index n = graph.num_nodes();
  std::set<std::pair<Index, Index>> seen;
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const Edge& e = graph.edges[k];
    const auto loc = static_cast<Index>(k);
    const std::string tag = "edge " + std::to_string(k) + " (" + std::to_string(e.sender) + "->" +
                            std::to_string(e.receiver) + ")";
    if (e.sender < 0 || e.sender >= n || e.receiver < 0 || e.receiver >= n) {
      out.push_back({Violation::Kind::edge_out_of_range, loc, tag + " index out of range"});
      continue;
    }
    if (e.sender == e.receiver) {
      out.push_back({Violation::Kind::self_loop, loc, tag + " is a self-loop"});
    }
    if (!seen.insert({e.sender, e.receiver}).second) {
      out.push_back({Violation::Kind::duplicate_edge, loc, tag + " is duplicated"});
    }
  }
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const Edge& e = graph.edges[k];
    if (e.sender < 0 || e.sender >= n || e.receiver < 0 || e.receiver >= n) continue;
    if (e.sender == e.receiver) continue;
    if (!seen.contains({e.receiver, e.sender})) {
      out.push_back({Violation::Kind::missing_reverse_edge, static_cast<Index>(k),
                     "edge " + std::to_string(k) + " (" + std::to_string(e.sender) + "->" +
                         std::to_string(e.receiver) + ") has no reverse edge"});
    }
  }
  // Zero-width feature matrices mean "not featurized yet".
  if (graph.node_features.cols() > 0 && graph.node_features.rows() != n) {
    out.push_back({Violation::Kind::node_feature_rows, graph.node_features.rows(),
                   "node feature rows " + std::to_string(graph.node_features.rows()) +
                       " != node count " + std::to_string(n)});
  }
  if (graph.edge_features.cols() > 0 && graph.edge_features.rows() != graph.num_edges()) {
    out.push_back({Violation::Kind::edge_feature_rows, graph.edge_features.rows(),
                   "edge feature rows " + std::to_string(graph.edge_features.rows()) +
                       " != edge count " + std::to_string(graph.num_edges())});
  }
  if (graph.node_targets && graph.node_targets->rows() != n) {
    out.push_back({Violation::Kind::node_target_rows, graph.node_targets->rows(),
                   "node target rows " + std::to_string(graph.node_targets->rows()) +
                       " != node count " + std::to_string(n)});
  }
  return out;
}

} // namespace geognn
