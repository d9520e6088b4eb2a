#pragma once

#include "geognn/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace geognn {

enum class Activation { linear, relu, sine };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpConfig {
  Index input_size = 1;
  Index depth = 1;   // hidden layers
  Index width = 1;
  Index output_size = 1;
  Activation output_activation = Activation::linear;
  double sine_frequency = 1.0;  // hidden units compute sin(frequency * z)

  void validate() const;
  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

class Mlp;

/// Primal values recorded by a forward pass, consumed by Mlp::backward.
struct MlpTape {
  std::vector<Matrix> inputs;          // input to each layer
  std::vector<Matrix> pre_activations; // W h + b for each layer
  bool recorded = false;
};

/// Dense multilayer perceptron: `depth` sine hidden layers followed by an
/// output layer with a configurable activation. Rows of the input are
/// independent samples.
class Mlp {
public:
  Mlp() = default;
  /// All parameters zero.
  explicit Mlp(const MlpConfig& config);

  /// A lone output layer with no hidden layers (depth 0); used to pin
  /// down the affine map and output activations in isolation.
  static Mlp single_layer(Matrix weight, Vector bias, Activation output_activation);

  const MlpConfig& config() const { return config_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, MlpTape& tape) const;

  /// Accumulates parameter gradients into `grads` (same shapes as this) and
  /// returns the gradient with respect to the input rows.
  Matrix backward(const MlpTape& tape, const Matrix& upstream, Mlp& grads) const;

  /// Flat views of every weight and bias, in layer order (weight then bias).
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  Index parameter_count() const;

  void set_zero();

private:
  void check_input(const Matrix& x) const;

  MlpConfig config_;
  std::vector<DenseLayer> layers_;
};

/// He (normal, fan-in) initialisation: W ~ N(0, 2 / fan_in), b = 0.
Mlp he_init(const MlpConfig& config, std::mt19937_64& rng);
Mlp he_init(const MlpConfig& config, std::uint64_t seed);

} // namespace geognn
