#include "geognn/mlp.hpp"

#include "geognn/error.hpp"
#include "sine_kernels.hpp"

#include <cmath>

namespace geognn {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sine: return "sine";
  }
  return "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "sine") return Activation::sine;
  throw Error(ErrorKind::config, "unknown activation '" + name + "'");
}

void MlpConfig::validate() const {
  if (input_size < 1 || depth < 1 || width < 1 || output_size < 1) {
    throw Error(ErrorKind::config, "MLP sizes must be >= 1 (input " + std::to_string(input_size) + ", depth " +
                                       std::to_string(depth) + ", width " + std::to_string(width) +
                                       ", output " + std::to_string(output_size) + ")");
  }
  if (!(sine_frequency > 0.0)) throw Error(ErrorKind::config, "sine frequency must be positive");
}

Mlp::Mlp(const MlpConfig& config) : config_(config) {
  config_.validate();
  Index fan_in = config_.input_size;
  for (Index k = 0; k <= config_.depth; ++k) {
    const Index fan_out = k == config_.depth ? config_.output_size : config_.width;
    layers_.push_back({Matrix::Zero(fan_out, fan_in), Vector::Zero(fan_out)});
    fan_in = fan_out;
  }
}

Mlp Mlp::single_layer(Matrix weight, Vector bias, Activation output_activation) {
  if (weight.rows() != bias.size() || weight.size() == 0) {
    throw Error(ErrorKind::shape_mismatch, "single layer weight/bias shapes disagree");
  }
  Mlp mlp;
  mlp.config_.input_size = weight.cols();
  mlp.config_.depth = 0;
  mlp.config_.width = weight.rows();
  mlp.config_.output_size = weight.rows();
  mlp.config_.output_activation = output_activation;
  mlp.layers_.push_back({std::move(weight), std::move(bias)});
  return mlp;
}

void Mlp::check_input(const Matrix& x) const {
  if (x.cols() != config_.input_size) {
    throw Error(ErrorKind::shape_mismatch, "MLP expects input width " + std::to_string(config_.input_size) +
                                               ", got " + std::to_string(x.cols()));
  }
}

namespace {

void activate(Matrix& z, Activation a, double frequency) {
  switch (a) {
    case Activation::linear: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::sine: detail::sine_in_place(z.data(), static_cast<std::size_t>(z.size()), frequency); break;
  }
}

// d act / dz evaluated at the pre-activation, multiplied into `grad`.
void activation_backward(Matrix& grad, const Matrix& z, Activation a, double frequency) {
  switch (a) {
    case Activation::linear: break;
    case Activation::relu: grad.array() *= (z.array() > 0.0).cast<double>(); break;
    case Activation::sine:
      detail::scale_by_sine_derivative(grad.data(), z.data(), static_cast<std::size_t>(grad.size()), frequency);
      break;
  }
}

} // namespace

Matrix Mlp::forward(const Matrix& x) const {
  check_input(x);
  Matrix h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    Matrix z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    const bool last = k + 1 == layers_.size();
    activate(z, last ? config_.output_activation : Activation::sine, config_.sine_frequency);
    h = std::move(z);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, MlpTape& tape) const {
  check_input(x);
  tape.inputs.resize(layers_.size());
  tape.pre_activations.resize(layers_.size());
  Matrix h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    Matrix z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    tape.inputs[k] = std::move(h);
    tape.pre_activations[k] = z;
    const bool last = k + 1 == layers_.size();
    activate(z, last ? config_.output_activation : Activation::sine, config_.sine_frequency);
    h = std::move(z);
  }
  tape.recorded = true;
  return h;
}

Matrix Mlp::backward(const MlpTape& tape, const Matrix& upstream, Mlp& grads) const {
  if (!tape.recorded || tape.inputs.size() != layers_.size()) {
    throw Error(ErrorKind::shape_mismatch, "MLP backward called without a recorded forward pass");
  }
  if (upstream.cols() != config_.output_size || upstream.rows() != tape.inputs.front().rows()) {
    throw Error(ErrorKind::shape_mismatch, "MLP backward: upstream gradient shape does not match the output");
  }
  if (grads.layers_.size() != layers_.size()) {
    grads = *this;
    grads.set_zero();
  }

  Matrix g = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const bool last = k + 1 == layers_.size();
    activation_backward(g, tape.pre_activations[k], last ? config_.output_activation : Activation::sine,
                        config_.sine_frequency);
    grads.layers_[k].weight.noalias() += g.transpose() * tape.inputs[k];
    grads.layers_[k].bias.noalias() += g.colwise().sum().transpose();
    g = g * layers_[k].weight;
  }
  return g;
}

std::vector<std::span<double>> Mlp::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers_) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> Mlp::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& layer : layers_) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

Index Mlp::parameter_count() const {
  Index n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void Mlp::set_zero() {
  for (auto& layer : layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

Mlp he_init(const MlpConfig& config, std::mt19937_64& rng) {
  Mlp mlp(config);
  for (auto& layer : mlp.layers()) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(layer.weight.cols()));
    std::normal_distribution<double> normal(0.0, stddev);
    for (Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = normal(rng);
  }
  return mlp;
}

Mlp he_init(const MlpConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return he_init(config, rng);
}

} // namespace geognn
