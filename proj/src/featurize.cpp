#include "geognn/featurize.hpp"

#include "geognn/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace geognn {

namespace {

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

} // namespace

std::vector<std::string> default_cell_types() { return {"tet", "hex", "wedge", "pyramid"}; }

Eigen::Vector3d reference_point_feature_design(const Matrix& positions) {
  const Index n = positions.rows();
  if (n < 1) throw Error(ErrorKind::empty_input, "reference point of an empty graph");
  if (positions.cols() < 2) {
    throw Error(ErrorKind::shape_mismatch, "feature-design encoding needs 2-D or 3-D positions");
  }
  std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = positions(i, 0);
    ys[static_cast<std::size_t>(i)] = positions(i, 1);
  }
  return {median(std::move(xs)), median(std::move(ys)), 0.0};
}

std::vector<Index> compute_node_degree(const Graph& graph) {
  std::vector<Index> degree(static_cast<std::size_t>(graph.num_nodes()), 0);
  // Edges are bidirectional, so counting distinct senders per receiver
  // equals counting distinct undirected neighbours.
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(graph.edges.size());
  for (const Edge& e : graph.edges) {
    if (e.sender != e.receiver) pairs.emplace_back(e.receiver, e.sender);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& p : pairs) ++degree[static_cast<std::size_t>(p.first)];
  return degree;
}

Matrix encode_nodes_feature_design(const Graph& graph,
                                   const std::vector<std::vector<std::string>>& node_cell_types,
                                   const std::vector<std::string>& vocabulary) {
  const Index n = graph.num_nodes();
  if (static_cast<Index>(node_cell_types.size()) != n) {
    throw Error(ErrorKind::shape_mismatch, "cell-type labels for " + std::to_string(node_cell_types.size()) +
                                               " nodes, graph has " + std::to_string(n));
  }
  std::unordered_map<std::string, Index> slot;
  for (std::size_t k = 0; k < vocabulary.size(); ++k) slot.emplace(vocabulary[k], static_cast<Index>(k));

  const Eigen::Vector3d ref = reference_point_feature_design(graph.positions);
  const auto degree = compute_node_degree(graph);
  const Index c = static_cast<Index>(vocabulary.size());
  Matrix out = Matrix::Zero(n, feature_design_width(vocabulary.size()));
  for (Index i = 0; i < n; ++i) {
    Eigen::Vector3d rel = Eigen::Vector3d::Zero();
    for (Index d = 0; d < std::min<Index>(3, graph.dim()); ++d) rel(d) = graph.positions(i, d);
    rel -= ref;
    out(i, 0) = rel(0);
    out(i, 1) = rel(1);
    out(i, 2) = rel(2);
    out(i, 3) = rel.lpNorm<1>();
    for (const auto& label : node_cell_types[static_cast<std::size_t>(i)]) {
      auto it = slot.find(label);
      if (it == slot.end()) {
        throw Error(ErrorKind::vocabulary,
                    "node " + std::to_string(i) + " has cell type '" + label + "' not in the vocabulary");
      }
      out(i, 4 + it->second) = 1.0;
    }
    out(i, 4 + c) = static_cast<double>(degree[static_cast<std::size_t>(i)]);
  }
  return out;
}

Matrix encode_nodes_airfoil(const Graph& graph, const std::vector<bool>& upper, double u0, double v0) {
  const Index n = graph.num_nodes();
  if (static_cast<Index>(upper.size()) != n) {
    throw Error(ErrorKind::shape_mismatch, "upper/lower flags for " + std::to_string(upper.size()) +
                                               " nodes, graph has " + std::to_string(n));
  }
  if (graph.dim() != 2) throw Error(ErrorKind::shape_mismatch, "airfoil encoding needs 2-D positions");
  Matrix out(n, airfoil_width);
  for (Index i = 0; i < n; ++i) {
    const bool up = upper[static_cast<std::size_t>(i)];
    out.row(i) << graph.positions(i, 0), graph.positions(i, 1), up ? 1.0 : 0.0, up ? 0.0 : 1.0, u0, v0;
  }
  return out;
}

Matrix encode_edges(const Graph& graph) {
  const Index d = graph.dim();
  Matrix out(graph.num_edges(), d + 1);
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const Edge& e = graph.edges[static_cast<std::size_t>(k)];
    const auto disp = (graph.positions.row(e.sender) - graph.positions.row(e.receiver)).eval();
    out.row(k).head(d) = disp;
    out(k, d) = disp.norm();
  }
  return out;
}

Normalizer::Normalizer(Vector shift, Vector scale)
    : shift_(std::move(shift)), scale_(std::move(scale)), fitted_(true) {
  if (shift_.size() != scale_.size()) throw Error(ErrorKind::shape_mismatch, "normalizer shift/scale widths differ");
}

Normalizer Normalizer::fit(const Matrix& matrix) { return fit(std::vector<const Matrix*>{&matrix}); }

Normalizer Normalizer::fit(const std::vector<const Matrix*>& matrices) {
  if (matrices.empty()) throw Error(ErrorKind::empty_input, "cannot fit a normalizer on no data");
  const Index width = matrices.front()->cols();
  Vector sum = Vector::Zero(width);
  Index rows = 0;
  for (const Matrix* m : matrices) {
    if (m->cols() != width) throw Error(ErrorKind::shape_mismatch, "normalizer inputs have different widths");
    sum += m->colwise().sum().transpose();
    rows += m->rows();
  }
  if (rows == 0) throw Error(ErrorKind::empty_input, "cannot fit a normalizer on zero rows");
  const Vector mean = sum / static_cast<double>(rows);
  Vector sq = Vector::Zero(width);
  for (const Matrix* m : matrices) {
    sq += (m->rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  Vector shift = mean;
  Vector scale = (sq / static_cast<double>(rows)).array().sqrt();
  for (Index c = 0; c < width; ++c) {
    // Constant columns (relative to their magnitude) are passed through.
    const double tol = 1e-12 * std::max(1.0, std::abs(mean(c)));
    if (!(scale(c) > tol)) {
      shift(c) = 0.0;
      scale(c) = 1.0;
    }
  }
  return Normalizer(std::move(shift), std::move(scale));
}

void Normalizer::require(const Matrix& m) const {
  if (!fitted_) throw Error(ErrorKind::not_fitted, "normalizer used before fitting");
  if (m.cols() != shift_.size()) {
    throw Error(ErrorKind::shape_mismatch, "normalizer width " + std::to_string(shift_.size()) +
                                               " applied to " + std::to_string(m.cols()) + " columns");
  }
}

Matrix Normalizer::apply(const Matrix& m) const {
  require(m);
  return ((m.rowwise() - shift_.transpose()).array().rowwise() / scale_.transpose().array()).matrix();
}

Matrix Normalizer::invert(const Matrix& m) const {
  require(m);
  return ((m.array().rowwise() * scale_.transpose().array()).rowwise() + shift_.transpose().array()).matrix();
}

PressureNormalized normalize_pressure_target(const Vector& pressure, double u0, double v0,
                                             VelocityDivisor divisor) {
  double vel = u0 * u0 + v0 * v0;
  if (!(vel > 0.0)) throw Error(ErrorKind::degenerate_freestream, "freestream velocity is zero");
  if (divisor == VelocityDivisor::speed) vel = std::sqrt(vel);
  PressureNormalized out;
  out.vel = vel;
  Vector scaled = pressure / vel;
  out.mean = scaled.size() > 0 ? scaled.mean() : 0.0;
  out.values = scaled.array() - out.mean;
  return out;
}

Vector denormalize_pressure_target(const Vector& normalized, double mean, double vel) {
  return (normalized.array() + mean) * vel;
}

} // namespace geognn
