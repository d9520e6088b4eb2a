#include "geognn/gnn.hpp"

#include "geognn/error.hpp"

namespace geognn {

const char* to_string(TaskMode mode) {
  return mode == TaskMode::node_level ? "node_level" : "graph_level";
}

TaskMode task_mode_from_string(const std::string& name) {
  if (name == "node_level" || name == "node") return TaskMode::node_level;
  if (name == "graph_level" || name == "graph") return TaskMode::graph_level;
  throw Error(ErrorKind::config, "unknown task mode '" + name + "'");
}

void GnnConfig::validate() const {
  if (node_input_size < 1 || edge_input_size < 1) throw Error(ErrorKind::config, "feature widths must be >= 1");
  if (latent_size < 1) throw Error(ErrorKind::config, "latent size must be >= 1");
  if (steps < 0) throw Error(ErrorKind::config, "message-passing steps must be >= 0");
  if (graph_output_size < 1) throw Error(ErrorKind::config, "graph output size must be >= 1");
  if (task == TaskMode::node_level && node_output_size < 1) {
    throw Error(ErrorKind::config, "node output size must be >= 1");
  }
  for (const MlpConfig& c : {edge_encoder_config(), node_encoder_config(), edge_processor_config(),
                             node_processor_config(), graph_decoder_config()}) {
    c.validate();
  }
  if (task == TaskMode::node_level) node_decoder_config().validate();
}

namespace {

MlpConfig make(Index in, const MlpShape& shape, Index out, Activation act, double freq) {
  return MlpConfig{in, shape.depth, shape.width, out, act, freq};
}

} // namespace

MlpConfig GnnConfig::edge_encoder_config() const {
  return make(edge_input_size, encoder, latent_size, Activation::linear, sine_frequency);
}
MlpConfig GnnConfig::node_encoder_config() const {
  return make(node_input_size, encoder, latent_size, Activation::linear, sine_frequency);
}
MlpConfig GnnConfig::edge_processor_config() const {
  return make(3 * latent_size, processor, latent_size, Activation::linear, sine_frequency);
}
MlpConfig GnnConfig::node_processor_config() const {
  return make(2 * latent_size, processor, latent_size, Activation::linear, sine_frequency);
}
MlpConfig GnnConfig::graph_decoder_config() const {
  return make(latent_size, graph_decoder, graph_output_size, graph_output_activation, sine_frequency);
}
MlpConfig GnnConfig::node_decoder_config() const {
  return make(latent_size + graph_output_size, node_decoder, node_output_size, node_output_activation,
              sine_frequency);
}

GnnModel::GnnModel(const GnnConfig& config) : config_(config) {
  config_.validate();
  edge_encoder_ = Mlp(config_.edge_encoder_config());
  node_encoder_ = Mlp(config_.node_encoder_config());
  for (Index k = 0; k < config_.steps; ++k) {
    edge_processors_.emplace_back(config_.edge_processor_config());
    node_processors_.emplace_back(config_.node_processor_config());
  }
  graph_decoder_ = Mlp(config_.graph_decoder_config());
  if (config_.task == TaskMode::node_level) node_decoder_.emplace(config_.node_decoder_config());
}

Mlp& GnnModel::node_decoder() {
  if (!node_decoder_) throw Error(ErrorKind::config, "graph-level model has no node decoder");
  return *node_decoder_;
}

void GnnModel::check_graph(const Graph& graph) const {
  if (graph.node_features.rows() != graph.num_nodes() || graph.node_features.cols() != config_.node_input_size) {
    throw Error(ErrorKind::shape_mismatch, "node features are " + std::to_string(graph.node_features.rows()) +
                                               " x " + std::to_string(graph.node_features.cols()) +
                                               ", model expects N x " + std::to_string(config_.node_input_size));
  }
  if (graph.edge_features.rows() != graph.num_edges() || graph.edge_features.cols() != config_.edge_input_size) {
    throw Error(ErrorKind::shape_mismatch, "edge features are " + std::to_string(graph.edge_features.rows()) +
                                               " x " + std::to_string(graph.edge_features.cols()) +
                                               ", model expects E x " + std::to_string(config_.edge_input_size));
  }
}

LatentState GnnModel::encode(const Graph& graph) const {
  check_graph(graph);
  return {node_encoder_.forward(graph.node_features), edge_encoder_.forward(graph.edge_features)};
}

namespace {

Matrix gather_edge_input(const Graph& topology, const LatentState& state) {
  const Index nl = state.nodes.cols();
  Matrix x(topology.num_edges(), 3 * nl);
  x.leftCols(nl) = state.edges;
  for (Index k = 0; k < topology.num_edges(); ++k) {
    const Edge& e = topology.edges[static_cast<std::size_t>(k)];
    x.row(k).segment(nl, nl) = state.nodes.row(e.sender);
    x.row(k).segment(2 * nl, nl) = state.nodes.row(e.receiver);
  }
  return x;
}

Matrix gather_node_input(const Graph& topology, const LatentState& state, const Matrix& edge_update) {
  const Index nl = state.nodes.cols();
  Matrix x(state.nodes.rows(), 2 * nl);
  x.leftCols(nl) = state.nodes;
  x.rightCols(nl).setZero();
  for (Index k = 0; k < topology.num_edges(); ++k) {
    x.row(topology.edges[static_cast<std::size_t>(k)].receiver).segment(nl, nl) += edge_update.row(k);
  }
  return x;
}

void check_segments(std::span<const Segment> segments, Index rows) {
  Index next = 0;
  for (const Segment& s : segments) {
    if (s.length <= 0) throw Error(ErrorKind::empty_input, "cannot pool an empty graph segment");
    if (s.start != next) throw Error(ErrorKind::shape_mismatch, "segments are not contiguous");
    next = s.start + s.length;
  }
  if (next != rows) throw Error(ErrorKind::shape_mismatch, "segments do not cover the latent node rows");
}

Matrix mean_pool(const Matrix& nodes, std::span<const Segment> segments) {
  check_segments(segments, nodes.rows());
  Matrix pooled(static_cast<Index>(segments.size()), nodes.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    pooled.row(static_cast<Index>(s)) =
        nodes.middleRows(seg.start, seg.length).colwise().sum() / static_cast<double>(seg.length);
  }
  return pooled;
}

Matrix node_decoder_input(const Matrix& nodes, const Matrix& graph_features, std::span<const Segment> segments) {
  if (graph_features.rows() != static_cast<Index>(segments.size())) {
    throw Error(ErrorKind::shape_mismatch, "one graph feature row is needed per segment");
  }
  check_segments(segments, nodes.rows());
  Matrix x(nodes.rows(), nodes.cols() + graph_features.cols());
  x.leftCols(nodes.cols()) = nodes;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    x.block(seg.start, nodes.cols(), seg.length, graph_features.cols()).rowwise() =
        graph_features.row(static_cast<Index>(s));
  }
  return x;
}

} // namespace

void GnnModel::message_passing_step(Index step, const Graph& topology, LatentState& state) const {
  if (step < 0 || step >= config_.steps) {
    throw Error(ErrorKind::config, "message-passing step " + std::to_string(step) + " out of range (L = " +
                                       std::to_string(config_.steps) + ")");
  }
  if (state.nodes.rows() != topology.num_nodes() || state.edges.rows() != topology.num_edges()) {
    throw Error(ErrorKind::shape_mismatch, "latent state does not match the graph");
  }
  const auto k = static_cast<std::size_t>(step);
  const Matrix edge_update = edge_processors_[k].forward(gather_edge_input(topology, state));
  const Matrix node_update = node_processors_[k].forward(gather_node_input(topology, state, edge_update));
  state.edges += edge_update;
  state.nodes += node_update;
}

Matrix GnnModel::decode_graph(const LatentState& state, std::span<const Segment> segments) const {
  return graph_decoder_.forward(mean_pool(state.nodes, segments));
}

Matrix GnnModel::decode_node(const LatentState& state, const Matrix& graph_features,
                             std::span<const Segment> segments) const {
  if (!node_decoder_) throw Error(ErrorKind::config, "graph-level model has no node decoder");
  return node_decoder_->forward(node_decoder_input(state.nodes, graph_features, segments));
}

Prediction GnnModel::predict(const Graph& graph) const {
  LatentState state = encode(graph);
  for (Index k = 0; k < config_.steps; ++k) message_passing_step(k, graph, state);
  const Segment whole{0, graph.num_nodes()};
  Prediction out;
  out.graph = decode_graph(state, std::span<const Segment>(&whole, 1));
  if (config_.task == TaskMode::node_level) {
    out.node = decode_node(state, out.graph, std::span<const Segment>(&whole, 1));
  }
  return out;
}

Prediction GnnModel::predict(const BatchedGraph& batch) const {
  const Graph& graph = batch.graph;
  LatentState state = encode(graph);
  for (Index k = 0; k < config_.steps; ++k) message_passing_step(k, graph, state);
  Prediction out;
  out.graph = decode_graph(state, batch.segments);
  if (config_.task == TaskMode::node_level) out.node = decode_node(state, out.graph, batch.segments);
  return out;
}

Prediction GnnModel::forward(const BatchedGraph& batch, GnnTape& tape) const {
  const Graph& graph = batch.graph;
  check_graph(graph);
  tape = GnnTape{};
  tape.batch = &batch;
  LatentState state{node_encoder_.forward(graph.node_features, tape.node_encoder),
                    edge_encoder_.forward(graph.edge_features, tape.edge_encoder)};
  tape.steps.resize(static_cast<std::size_t>(config_.steps));
  for (std::size_t k = 0; k < tape.steps.size(); ++k) {
    const Matrix edge_update = edge_processors_[k].forward(gather_edge_input(graph, state), tape.steps[k].edge);
    const Matrix node_update =
        node_processors_[k].forward(gather_node_input(graph, state, edge_update), tape.steps[k].node);
    state.edges += edge_update;
    state.nodes += node_update;
  }
  Prediction out;
  out.graph = graph_decoder_.forward(mean_pool(state.nodes, batch.segments), tape.graph_decoder);
  if (config_.task == TaskMode::node_level) {
    out.node = node_decoder_->forward(node_decoder_input(state.nodes, out.graph, batch.segments),
                                      tape.node_decoder);
  }
  tape.recorded = true;
  return out;
}

void GnnModel::backward(const GnnTape& tape, const PredictionGradient& upstream, GnnModel& grads) const {
  if (!tape.recorded || tape.batch == nullptr) {
    throw Error(ErrorKind::shape_mismatch, "GNN backward called without a recorded forward pass");
  }
  if (grads.mlps().size() != mlps().size()) grads = zeros_like();

  const BatchedGraph& batch = *tape.batch;
  const Graph& graph = batch.graph;
  const Index n = graph.num_nodes();
  const Index nl = config_.latent_size;
  const auto segments = std::span<const Segment>(batch.segments);
  const auto num_segments = static_cast<Index>(segments.size());

  Matrix d_nodes = Matrix::Zero(n, nl);
  Matrix d_edges = Matrix::Zero(graph.num_edges(), nl);
  Matrix d_graph = Matrix::Zero(num_segments, config_.graph_output_size);
  if (upstream.graph.size() > 0) {
    if (upstream.graph.rows() != num_segments || upstream.graph.cols() != config_.graph_output_size) {
      throw Error(ErrorKind::shape_mismatch, "graph output gradient has the wrong shape");
    }
    d_graph += upstream.graph;
  }

  if (upstream.node.size() > 0) {
    if (config_.task != TaskMode::node_level) {
      throw Error(ErrorKind::config, "node-level gradient given to a graph-level model");
    }
    if (upstream.node.rows() != n || upstream.node.cols() != config_.node_output_size) {
      throw Error(ErrorKind::shape_mismatch, "node output gradient has the wrong shape");
    }
    const Matrix d_in = node_decoder_->backward(tape.node_decoder, upstream.node, *grads.node_decoder_);
    d_nodes += d_in.leftCols(nl);
    for (Index s = 0; s < num_segments; ++s) {
      const Segment& seg = segments[static_cast<std::size_t>(s)];
      d_graph.row(s) += d_in.block(seg.start, nl, seg.length, config_.graph_output_size).colwise().sum();
    }
  }

  const Matrix d_pooled = graph_decoder_.backward(tape.graph_decoder, d_graph, grads.graph_decoder_);
  for (Index s = 0; s < num_segments; ++s) {
    const Segment& seg = segments[static_cast<std::size_t>(s)];
    d_nodes.middleRows(seg.start, seg.length).rowwise() += d_pooled.row(s) / static_cast<double>(seg.length);
  }

  for (std::size_t k = tape.steps.size(); k-- > 0;) {
    // Residual: the incoming gradients pass straight through and also feed
    // the update MLPs.
    const Matrix d_node_in = node_processors_[k].backward(tape.steps[k].node, d_nodes, grads.node_processors_[k]);
    Matrix d_edge_update = d_edges;
    for (Index e = 0; e < graph.num_edges(); ++e) {
      d_edge_update.row(e) += d_node_in.row(graph.edges[static_cast<std::size_t>(e)].receiver).tail(nl);
    }
    d_nodes += d_node_in.leftCols(nl);
    const Matrix d_edge_in = edge_processors_[k].backward(tape.steps[k].edge, d_edge_update, grads.edge_processors_[k]);
    d_edges += d_edge_in.leftCols(nl);
    for (Index e = 0; e < graph.num_edges(); ++e) {
      const Edge& edge = graph.edges[static_cast<std::size_t>(e)];
      d_nodes.row(edge.sender) += d_edge_in.row(e).segment(nl, nl);
      d_nodes.row(edge.receiver) += d_edge_in.row(e).segment(2 * nl, nl);
    }
  }

  node_encoder_.backward(tape.node_encoder, d_nodes, grads.node_encoder_);
  edge_encoder_.backward(tape.edge_encoder, d_edges, grads.edge_encoder_);
}

std::vector<Mlp*> GnnModel::mlps() {
  std::vector<Mlp*> out{&edge_encoder_, &node_encoder_};
  for (std::size_t k = 0; k < edge_processors_.size(); ++k) {
    out.push_back(&edge_processors_[k]);
    out.push_back(&node_processors_[k]);
  }
  out.push_back(&graph_decoder_);
  if (node_decoder_) out.push_back(&*node_decoder_);
  return out;
}

std::vector<const Mlp*> GnnModel::mlps() const {
  std::vector<const Mlp*> out{&edge_encoder_, &node_encoder_};
  for (std::size_t k = 0; k < edge_processors_.size(); ++k) {
    out.push_back(&edge_processors_[k]);
    out.push_back(&node_processors_[k]);
  }
  out.push_back(&graph_decoder_);
  if (node_decoder_) out.push_back(&*node_decoder_);
  return out;
}

std::vector<std::span<double>> GnnModel::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (Mlp* m : mlps()) {
    auto blocks = m->parameter_blocks();
    out.insert(out.end(), blocks.begin(), blocks.end());
  }
  return out;
}

std::vector<std::span<const double>> GnnModel::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  for (const Mlp* m : mlps()) {
    auto blocks = m->parameter_blocks();
    out.insert(out.end(), blocks.begin(), blocks.end());
  }
  return out;
}

Index GnnModel::parameter_count() const {
  Index n = 0;
  for (const Mlp* m : mlps()) n += m->parameter_count();
  return n;
}

void GnnModel::set_zero() {
  for (Mlp* m : mlps()) m->set_zero();
}

GnnModel GnnModel::zeros_like() const {
  GnnModel out = *this;
  out.set_zero();
  return out;
}

GnnModel init_model(const GnnConfig& config, std::uint64_t seed) {
  GnnModel model(config);
  std::mt19937_64 rng(seed);
  for (Mlp* m : model.mlps()) *m = he_init(m->config(), rng);
  return model;
}

} // namespace geognn
