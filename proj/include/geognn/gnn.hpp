#pragma once

#include "geognn/graph.hpp"
#include "geognn/mlp.hpp"

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace geognn {

enum class TaskMode { node_level, graph_level };

const char* to_string(TaskMode mode);
TaskMode task_mode_from_string(const std::string& name);

/// Hidden depth and width of one MLP role.
struct MlpShape {
  Index depth = 1;
  Index width = 1;
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

struct GnnConfig {
  Index node_input_size = 1;
  Index edge_input_size = 1;
  Index latent_size = 1;   // n_l
  Index steps = 1;         // L message-passing steps
  MlpShape encoder;        // epsilon^E, epsilon^V
  MlpShape processor;      // rho^E, rho^V (one pair per step)
  MlpShape graph_decoder;  // delta^G
  MlpShape node_decoder;   // delta^V
  Index graph_output_size = 1;
  Index node_output_size = 1;
  Activation graph_output_activation = Activation::linear;
  Activation node_output_activation = Activation::linear;
  TaskMode task = TaskMode::node_level;
  double sine_frequency = 1.0;

  void validate() const;

  MlpConfig edge_encoder_config() const;
  MlpConfig node_encoder_config() const;
  MlpConfig edge_processor_config() const;
  MlpConfig node_processor_config() const;
  MlpConfig graph_decoder_config() const;
  MlpConfig node_decoder_config() const;

  friend bool operator==(const GnnConfig&, const GnnConfig&) = default;
};

/// Latent node (N x n_l) and edge (E x n_l) features.
struct LatentState {
  Matrix nodes;
  Matrix edges;
};

/// Model outputs. `graph` has one row per graph (segment); `node` is set in
/// node-level mode and has one row per node.
struct Prediction {
  Matrix graph;
  std::optional<Matrix> node;
};

/// Upstream gradients for a Prediction; empty matrices mean "no loss here".
struct PredictionGradient {
  Matrix graph;
  Matrix node;
};

struct GnnTape;

/// Encode-process-decode graph network.
class GnnModel {
public:
  GnnModel() = default;
  /// All parameters zero.
  explicit GnnModel(const GnnConfig& config);

  const GnnConfig& config() const { return config_; }

  LatentState encode(const Graph& graph) const;

  /// One residual message-passing step with processor block `step`.
  void message_passing_step(Index step, const Graph& topology, LatentState& state) const;

  /// Mean-pools latent nodes per segment and applies the graph decoder.
  Matrix decode_graph(const LatentState& state, std::span<const Segment> segments) const;

  /// Node decoder on [latent node | graph feature of the node's segment].
  Matrix decode_node(const LatentState& state, const Matrix& graph_features,
                     std::span<const Segment> segments) const;

  Prediction predict(const Graph& graph) const;
  Prediction predict(const BatchedGraph& batch) const;

  /// Forward pass that records everything backward() needs.
  Prediction forward(const BatchedGraph& batch, GnnTape& tape) const;

  /// Accumulates parameter gradients into `grads`.
  void backward(const GnnTape& tape, const PredictionGradient& upstream, GnnModel& grads) const;

  // Parameter access, fixed order: edge encoder, node encoder, then per step
  // edge and node processor, graph decoder, node decoder.
  std::vector<Mlp*> mlps();
  std::vector<const Mlp*> mlps() const;
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  Index parameter_count() const;
  void set_zero();
  GnnModel zeros_like() const;

  Mlp& edge_encoder() { return edge_encoder_; }
  Mlp& node_encoder() { return node_encoder_; }
  Mlp& edge_processor(Index step) { return edge_processors_.at(static_cast<std::size_t>(step)); }
  Mlp& node_processor(Index step) { return node_processors_.at(static_cast<std::size_t>(step)); }
  Mlp& graph_decoder() { return graph_decoder_; }
  Mlp& node_decoder();

private:
  void check_graph(const Graph& graph) const;

  GnnConfig config_;
  Mlp edge_encoder_;
  Mlp node_encoder_;
  std::vector<Mlp> edge_processors_;
  std::vector<Mlp> node_processors_;
  Mlp graph_decoder_;
  std::optional<Mlp> node_decoder_;
};

/// He-initialised model; all MLPs drawn from one generator in parameter order.
GnnModel init_model(const GnnConfig& config, std::uint64_t seed);

struct GnnStepTape {
  MlpTape edge;
  MlpTape node;
};

struct GnnTape {
  const BatchedGraph* batch = nullptr;
  MlpTape edge_encoder;
  MlpTape node_encoder;
  std::vector<GnnStepTape> steps;
  MlpTape graph_decoder;
  MlpTape node_decoder;
  bool recorded = false;
};

} // namespace geognn
