#include "geognn/pipeline.hpp"

#include "geognn/error.hpp"

namespace geognn {

const char* to_string(Encoding e) { return e == Encoding::airfoil ? "airfoil" : "feature_design"; }

Encoding encoding_from_string(const std::string& name) {
  if (name == "airfoil") return Encoding::airfoil;
  if (name == "feature_design") return Encoding::feature_design;
  throw Error(ErrorKind::config, "unknown encoding '" + name + "'");
}

const char* to_string(TargetScaling s) {
  switch (s) {
    case TargetScaling::none: return "none";
    case TargetScaling::zscore: return "zscore";
    case TargetScaling::scale: return "scale";
    case TargetScaling::pressure: return "pressure";
  }
  return "none";
}

TargetScaling target_scaling_from_string(const std::string& name) {
  if (name == "none") return TargetScaling::none;
  if (name == "zscore") return TargetScaling::zscore;
  if (name == "scale") return TargetScaling::scale;
  if (name == "pressure") return TargetScaling::pressure;
  throw Error(ErrorKind::config, "unknown target normalization '" + name + "' (none, zscore, scale, pressure)");
}

Graph raw_features(const GraphRecord& record, Encoding encoding, const std::vector<std::string>& cell_types) {
  Graph g = record.build_topology();
  if (encoding == Encoding::airfoil) {
    if (record.topology != TopologyKind::chain) {
      throw Error(ErrorKind::incompatible_graphs, "record '" + record.id + "' is a mesh, expected a surface chain");
    }
    if (!record.freestream) {
      throw Error(ErrorKind::shape_mismatch, "record '" + record.id + "' has no freestream condition");
    }
    g.node_features = encode_nodes_airfoil(g, record.upper, (*record.freestream)[0], (*record.freestream)[1]);
  } else {
    if (record.topology != TopologyKind::mesh) {
      throw Error(ErrorKind::incompatible_graphs, "record '" + record.id + "' is a chain, expected a mesh");
    }
    g.node_features = encode_nodes_feature_design(g, record.cell_types, cell_types);
  }
  g.edge_features = encode_edges(g);
  if (record.node_targets) {
    if (record.node_targets->rows() != g.num_nodes()) {
      throw Error(ErrorKind::shape_mismatch, "record '" + record.id + "' has " +
                                                 std::to_string(record.node_targets->rows()) +
                                                 " node target rows for " + std::to_string(g.num_nodes()) + " nodes");
    }
    g.node_targets = *record.node_targets;
  }
  if (record.graph_targets) g.graph_target = *record.graph_targets;
  return g;
}

Encoding detect_encoding(std::span<const GraphRecord> records) {
  if (records.empty()) throw Error(ErrorKind::empty_input, "dataset is empty");
  const TopologyKind kind = records.front().topology;
  for (const auto& r : records) {
    if (r.topology != kind) {
      throw Error(ErrorKind::incompatible_graphs, "dataset mixes surface chains and meshes");
    }
  }
  return kind == TopologyKind::chain ? Encoding::airfoil : Encoding::feature_design;
}

FeaturePipeline FeaturePipeline::fit(std::span<const GraphRecord> training, const FeatureOptions& options) {
  FeaturePipeline p;
  p.encoding = detect_encoding(training);
  p.options = options;
  if (p.encoding == Encoding::airfoil && options.target_scaling == TargetScaling::pressure) {
    for (const auto& r : training) {
      if (!r.freestream) throw Error(ErrorKind::shape_mismatch, "pressure scaling needs a freestream on '" + r.id + "'");
    }
  }
  if (p.encoding == Encoding::feature_design && options.target_scaling == TargetScaling::pressure) {
    throw Error(ErrorKind::config, "pressure target normalization applies to airfoil chains only");
  }

  std::vector<Graph> raw;
  raw.reserve(training.size());
  for (const auto& r : training) raw.push_back(raw_features(r, p.encoding, options.cell_types));

  std::vector<const Matrix*> nodes, edges, targets;
  for (const auto& g : raw) {
    nodes.push_back(&g.node_features);
    edges.push_back(&g.edge_features);
    if (g.node_targets) targets.push_back(&*g.node_targets);
  }
  p.node_normalizer = Normalizer::fit(nodes);
  p.edge_normalizer = Normalizer::fit(edges);
  if (!targets.empty() &&
      (options.target_scaling == TargetScaling::zscore || options.target_scaling == TargetScaling::scale)) {
    p.target_normalizer = Normalizer::fit(targets);
    if (options.target_scaling == TargetScaling::scale) {
      p.target_normalizer = Normalizer(Vector::Zero(p.target_normalizer.width()), p.target_normalizer.scale());
    }
  }
  return p;
}

Index FeaturePipeline::node_width() const {
  return encoding == Encoding::airfoil ? airfoil_width : feature_design_width(options.cell_types.size());
}

Index FeaturePipeline::edge_width() const { return edge_normalizer.width(); }

Sample FeaturePipeline::featurize(const GraphRecord& record) const {
  Sample s;
  s.id = record.id;
  s.graph = raw_features(record, encoding, options.cell_types);
  s.graph.node_features = node_normalizer.apply(s.graph.node_features);
  s.graph.edge_features = edge_normalizer.apply(s.graph.edge_features);
  const Index width = s.graph.node_targets ? s.graph.node_targets->cols() : target_normalizer.width();
  s.target_scale = Vector::Ones(width);
  s.target_shift = Vector::Zero(width);
  if (s.graph.node_targets) s.physical_node_targets = *s.graph.node_targets;
  switch (options.target_scaling) {
    case TargetScaling::none: break;
    case TargetScaling::zscore:
    case TargetScaling::scale:
      if (!target_normalizer.fitted()) break;
      if (s.graph.node_targets) s.graph.node_targets = target_normalizer.apply(*s.graph.node_targets);
      s.target_scale = target_normalizer.scale();
      s.target_shift = target_normalizer.shift();
      break;
    case TargetScaling::pressure: {
      if (!record.freestream) throw Error(ErrorKind::shape_mismatch, "record '" + record.id + "' has no freestream");
      const double u0 = (*record.freestream)[0];
      const double v0 = (*record.freestream)[1];
      if (!s.graph.node_targets) {
        // Without targets the per-graph mean is unknown; only the velocity
        // scaling can be undone.
        const auto probe = normalize_pressure_target(Vector::Zero(1), u0, v0, options.velocity);
        s.target_scale = Vector::Constant(width, probe.vel);
        break;
      }
      Matrix scaled(s.graph.num_nodes(), width);
      for (Index c = 0; c < width; ++c) {
        const auto norm = normalize_pressure_target(s.graph.node_targets->col(c), u0, v0, options.velocity);
        scaled.col(c) = norm.values;
        s.target_scale(c) = norm.vel;
        s.target_shift(c) = norm.mean * norm.vel;
      }
      s.graph.node_targets = std::move(scaled);
      break;
    }
  }
  return s;
}

std::vector<Sample> FeaturePipeline::featurize(std::span<const GraphRecord> records) const {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(featurize(r));
  return out;
}

} // namespace geognn
