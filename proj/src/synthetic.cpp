#include "geognn/synthetic.hpp"

#include "geognn/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace geognn {

const char* to_string(GeometryFamily family) {
  switch (family) {
    case GeometryFamily::chain: return "chain";
    case GeometryFamily::patch2d: return "patch2d";
    case GeometryFamily::patch3d: return "patch3d";
  }
  return "chain";
}

GeometryFamily geometry_family_from_string(const std::string& name) {
  if (name == "chain") return GeometryFamily::chain;
  if (name == "patch2d") return GeometryFamily::patch2d;
  if (name == "patch3d") return GeometryFamily::patch3d;
  throw Error(ErrorKind::config, "unknown geometry family '" + name + "' (chain, patch2d, patch3d)");
}

double synthetic_node_target(double x, double y, double z, double u0, double v0) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::sin(two_pi * x) * std::cos(two_pi * y) * std::exp(-z) + 0.5 * (u0 * x + v0 * y);
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Index uniform_int(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

void attach_targets(GraphRecord& r, double u0, double v0) {
  const Index n = r.num_nodes();
  Matrix y(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double z = r.positions.cols() > 2 ? r.positions(i, 2) : 0.0;
    y(i, 0) = synthetic_node_target(r.positions(i, 0), r.positions(i, 1), z, u0, v0);
  }
  r.graph_targets = Vector::Constant(1, y.mean());
  r.node_targets = std::move(y);
}

// NACA 4-digit style section with random thickness and camber, traversed
// trailing edge -> upper -> leading edge (0, 0) -> lower -> trailing edge.
GraphRecord make_chain(Rng& rng, Index n, bool closed) {
  const double t = uniform(rng, 0.06, 0.18);
  const double m = uniform(rng, 0.0, 0.06);
  const double p = uniform(rng, 0.3, 0.6);
  auto thickness = [t](double x) {
    return 5.0 * t * (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
                      0.1015 * x * x * x * x);
  };
  auto camber = [m, p](double x) {
    return x < p ? m / (p * p) * (2.0 * p * x - x * x)
                 : m / ((1.0 - p) * (1.0 - p)) * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x);
  };

  GraphRecord r;
  r.topology = TopologyKind::chain;
  r.closed = closed;
  r.positions.resize(n, 2);
  const Index n_upper = (n + 1) / 2;
  const Index n_lower = n - n_upper;
  Index row = 0;
  for (Index k = 0; k < n_upper; ++k, ++row) {
    const double x = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_upper - 1)));
    r.positions.row(row) << x, camber(x) + thickness(x);
    r.upper.push_back(true);
  }
  for (Index k = 1; k <= n_lower; ++k, ++row) {
    const double x = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_lower)));
    r.positions.row(row) << x, camber(x) - thickness(x);
    r.upper.push_back(false);
  }
  const double u0 = uniform(rng, -1.0, 1.0);
  const double v0 = uniform(rng, -1.0, 1.0);
  r.freestream = std::array<double, 2>{u0, v0};
  attach_targets(r, u0, v0);
  return r;
}

std::array<Index, 3> pick_grid(Rng& rng, Index min_nodes, Index max_nodes, bool three_d) {
  std::vector<std::array<Index, 3>> candidates;
  const std::vector<Index> layers = three_d ? std::vector<Index>{2, 3} : std::vector<Index>{1};
  for (Index nz : layers) {
    for (Index nx = 2; nx * 2 * nz <= max_nodes; ++nx) {
      for (Index ny = 2; nx * ny * nz <= max_nodes; ++ny) {
        if (nx * ny * nz >= min_nodes) candidates.push_back({nx, ny, nz});
      }
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorKind::config, "no grid fits the node-count range [" + std::to_string(min_nodes) + ", " +
                                       std::to_string(max_nodes) + "]");
  }
  return candidates[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<Index>(candidates.size()) - 1))];
}

GraphRecord make_patch(Rng& rng, Index min_nodes, Index max_nodes, bool three_d) {
  const auto [nx, ny, nz] = pick_grid(rng, min_nodes, max_nodes, three_d);
  const double lx = uniform(rng, 0.5, 1.0);
  const double ly = uniform(rng, 0.5, 1.0);
  const double lz = three_d ? uniform(rng, 0.2, 0.6) : 0.0;
  const double hx = lx / static_cast<double>(nx - 1);
  const double hy = ly / static_cast<double>(ny - 1);
  const double hz = nz > 1 ? lz / static_cast<double>(nz - 1) : 0.0;
  auto id = [&](Index i, Index j, Index k) { return (k * ny + j) * nx + i; };

  GraphRecord r;
  r.topology = TopologyKind::mesh;
  const Index n = nx * ny * nz;
  r.positions.resize(n, three_d ? 3 : 2);
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        const bool interior_x = i > 0 && i + 1 < nx;
        const bool interior_y = j > 0 && j + 1 < ny;
        const double x = static_cast<double>(i) * hx + (interior_x ? uniform(rng, -0.25, 0.25) * hx : 0.0);
        const double y = static_cast<double>(j) * hy + (interior_y ? uniform(rng, -0.25, 0.25) * hy : 0.0);
        r.positions(id(i, j, k), 0) = x;
        r.positions(id(i, j, k), 1) = y;
        if (three_d) r.positions(id(i, j, k), 2) = static_cast<double>(k) * hz;
      }
    }
  }

  std::vector<std::set<std::string>> labels(static_cast<std::size_t>(n));
  auto label = [&](std::span<const Index> nodes, const char* type) {
    for (Index v : nodes) labels[static_cast<std::size_t>(v)].insert(type);
  };

  if (!three_d) {
    for (Index j = 0; j + 1 < ny; ++j) {
      for (Index i = 0; i + 1 < nx; ++i) {
        const std::array<Index, 4> q{id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0)};
        if (uniform(rng, 0.0, 1.0) < 0.5) {
          r.cells.push_back({q[0], q[1], q[2], q[3]});
          label(q, "quad");
        } else {
          r.cells.push_back({q[0], q[1], q[2]});
          r.cells.push_back({q[0], q[2], q[3]});
          label(q, "tri");
        }
      }
    }
  } else {
    for (Index k = 0; k + 1 < nz; ++k) {
      for (Index j = 0; j + 1 < ny; ++j) {
        for (Index i = 0; i + 1 < nx; ++i) {
          // Standard hexahedron vertex numbering.
          const std::array<Index, 8> v{id(i, j, k),         id(i + 1, j, k),         id(i + 1, j + 1, k),
                                       id(i, j + 1, k),     id(i, j, k + 1),         id(i + 1, j, k + 1),
                                       id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)};
          const double pick = uniform(rng, 0.0, 1.0);
          if (pick < 1.0 / 3.0) {
            for (const auto& f : std::array<std::array<int, 4>, 6>{
                     {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}}}) {
              r.cells.push_back({v[f[0]], v[f[1]], v[f[2]], v[f[3]]});
            }
            label(v, "hex");
          } else if (pick < 2.0 / 3.0) {
            // Two prisms split along the 0-2 / 4-6 diagonal.
            for (const auto& w : std::array<std::array<int, 6>, 2>{{{0, 1, 2, 4, 5, 6}, {0, 2, 3, 4, 6, 7}}}) {
              r.cells.push_back({v[w[0]], v[w[1]], v[w[2]]});
              r.cells.push_back({v[w[3]], v[w[4]], v[w[5]]});
              for (int s = 0; s < 3; ++s) {
                const int a = s, b = (s + 1) % 3;
                r.cells.push_back({v[w[a]], v[w[b]], v[w[b + 3]], v[w[a + 3]]});
              }
            }
            label(v, "wedge");
          } else {
            // Six tetrahedra around the 0-6 main diagonal.
            for (const auto& t : std::array<std::array<int, 4>, 6>{
                     {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6}, {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}}}) {
              for (int s = 0; s < 4; ++s) {
                r.cells.push_back({v[t[s]], v[t[(s + 1) % 4]], v[t[(s + 2) % 4]]});
              }
            }
            label(v, "tet");
          }
        }
      }
    }
  }
  for (const auto& s : labels) r.cell_types.emplace_back(s.begin(), s.end());
  attach_targets(r, 0.0, 0.0);
  return r;
}

} // namespace

std::vector<GraphRecord> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.count < 1) throw Error(ErrorKind::config, "synthetic graph count must be >= 1");
  if (spec.min_nodes > spec.max_nodes) {
    throw Error(ErrorKind::config, "empty node-count range [" + std::to_string(spec.min_nodes) + ", " +
                                       std::to_string(spec.max_nodes) + "]");
  }
  if (spec.family == GeometryFamily::chain && spec.min_nodes < 3) {
    throw Error(ErrorKind::config, "chain family needs at least 3 nodes per graph");
  }
  std::vector<GraphRecord> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (Index g = 0; g < spec.count; ++g) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(g)};
    Rng rng(seq);
    GraphRecord r;
    switch (spec.family) {
      case GeometryFamily::chain:
        r = make_chain(rng, uniform_int(rng, spec.min_nodes, spec.max_nodes), spec.closed);
        break;
      case GeometryFamily::patch2d: r = make_patch(rng, spec.min_nodes, spec.max_nodes, false); break;
      case GeometryFamily::patch3d: r = make_patch(rng, spec.min_nodes, spec.max_nodes, true); break;
    }
    r.id = spec.id_prefix + std::to_string(g);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace geognn
