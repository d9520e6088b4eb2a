#include "geognn/trainer.hpp"

#include "geognn/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace geognn {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

double l1_norm(std::span<const std::span<const double>> parameters) {
  double total = 0.0;
  for (const auto& block : parameters) {
    for (double v : block) total += std::abs(v);
  }
  return total;
}

double loss(const Matrix& predictions, const Matrix& targets,
            std::span<const std::span<const double>> parameters, double l1_coefficient) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw Error(ErrorKind::shape_mismatch, "predictions are " + std::to_string(predictions.rows()) + " x " +
                                               std::to_string(predictions.cols()) + ", targets " +
                                               std::to_string(targets.rows()) + " x " +
                                               std::to_string(targets.cols()));
  }
  const double mae = predictions.size() > 0 ? (predictions - targets).cwiseAbs().mean() : 0.0;
  return mae + l1_coefficient * l1_norm(parameters);
}

BatchLoss loss_and_gradient(const GnnModel& model, const BatchedGraph& batch, double l1_coefficient,
                            GnnModel& grads) {
  GnnTape tape;
  const Prediction pred = model.forward(batch, tape);
  PredictionGradient upstream;
  Matrix residual;
  if (model.config().task == TaskMode::node_level) {
    if (!batch.graph.node_targets) throw Error(ErrorKind::shape_mismatch, "node-level training needs node targets");
    if (batch.graph.node_targets->cols() != pred.node->cols()) {
      throw Error(ErrorKind::shape_mismatch, "node targets have " + std::to_string(batch.graph.node_targets->cols()) +
                                                 " columns, model predicts " + std::to_string(pred.node->cols()));
    }
    residual = *pred.node - *batch.graph.node_targets;
  } else {
    if (!batch.graph.graph_target) throw Error(ErrorKind::shape_mismatch, "graph-level training needs graph targets");
    const Index rows = pred.graph.rows();
    const Index cols = pred.graph.cols();
    if (batch.graph.graph_target->size() != rows * cols) {
      throw Error(ErrorKind::shape_mismatch, "graph targets do not match the graph decoder output size");
    }
    residual = pred.graph - Eigen::Map<const Matrix>(batch.graph.graph_target->data(), rows, cols);
  }

  BatchLoss out;
  const auto count = static_cast<double>(residual.size());
  out.data = residual.size() > 0 ? residual.cwiseAbs().sum() / count : 0.0;
  Matrix d = residual.unaryExpr([](double r) { return sign(r); }) / count;
  if (model.config().task == TaskMode::node_level) {
    upstream.node = std::move(d);
  } else {
    upstream.graph = std::move(d);
  }
  model.backward(tape, upstream, grads);

  if (l1_coefficient != 0.0) {
    const auto params = model.parameter_blocks();
    auto gblocks = grads.parameter_blocks();
    out.l1 = l1_coefficient * l1_norm(params);
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t k = 0; k < params[b].size(); ++k) gblocks[b][k] += l1_coefficient * sign(params[b][k]);
    }
  }
  out.total = out.data + out.l1;
  return out;
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size()) throw Error(ErrorKind::shape_mismatch, "ADAM: parameter/gradient block count");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Vector::Zero(static_cast<Index>(p.size())));
      state.second_moment.push_back(Vector::Zero(static_cast<Index>(p.size())));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error(ErrorKind::shape_mismatch, "ADAM state does not mirror the parameters");
  }
  const auto& c = state.config;
  ++state.step;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto n = static_cast<Index>(params[b].size());
    if (static_cast<Index>(grads[b].size()) != n || state.first_moment[b].size() != n) {
      throw Error(ErrorKind::shape_mismatch, "ADAM: block " + std::to_string(b) + " size mismatch");
    }
    Eigen::Map<Vector> theta(params[b].data(), n);
    Eigen::Map<const Vector> g(grads[b].data(), n);
    Vector& m = state.first_moment[b];
    Vector& v = state.second_moment[b];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    theta.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

PlateauSchedule::PlateauSchedule(PlateauConfig config, double initial_lr) : config_(config), lr_(initial_lr) {}

double PlateauSchedule::update(double epoch_loss) {
  if (!has_best_ || epoch_loss < best_ - config_.min_delta * std::abs(best_)) {
    best_ = epoch_loss;
    has_best_ = true;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= config_.patience) {
    lr_ = std::max(lr_ * config_.factor, config_.min_lr);
    bad_epochs_ = 0;
  }
  return lr_;
}

void PlateauSchedule::restore(double lr, double best, std::int64_t bad_epochs) {
  lr_ = lr;
  best_ = best;
  has_best_ = true;
  bad_epochs_ = bad_epochs;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::config, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::config, "batch_size must be >= 1");
  if (!(initial_lr > 0.0)) throw Error(ErrorKind::config, "initial_lr must be > 0");
  if (!(factor > 0.0 && factor < 1.0)) throw Error(ErrorKind::config, "plateau factor must lie in (0, 1)");
  if (!(l1_coefficient >= 0.0)) throw Error(ErrorKind::config, "l1_coefficient must be >= 0");
  if (patience < 1) throw Error(ErrorKind::config, "patience must be >= 1");
  if (min_lr < 0.0 || min_lr > initial_lr) throw Error(ErrorKind::config, "min_lr must lie in [0, initial_lr]");
}

TrainLog fit(GnnModel& model, std::span<const Graph> dataset, const TrainConfig& config, TrainState* state,
             const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw Error(ErrorKind::empty_input, "training dataset is empty");

  TrainState local;
  TrainState& st = state ? *state : local;
  if (st.epoch == 0 && st.adam.step == 0) {
    st.adam = AdamState{config.adam, {}, {}, 0};
    st.schedule = PlateauSchedule(PlateauConfig{config.factor, config.patience, config.min_delta, config.min_lr},
                                  config.initial_lr);
  }

  std::vector<std::size_t> order(dataset.size());
  TrainLog log;
  GnnModel grads = model.zeros_like();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (std::int64_t epoch = st.epoch; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    const double lr = st.schedule.lr();
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += batch_size) {
      const std::size_t last = std::min(order.size(), first + batch_size);
      std::vector<const Graph*> members;
      for (std::size_t k = first; k < last; ++k) members.push_back(&dataset[order[k]]);
      const BatchedGraph batch = merge_batch(std::span<const Graph* const>(members));

      grads.set_zero();
      const BatchLoss bl = loss_and_gradient(model, batch, config.l1_coefficient, grads);
      if (!std::isfinite(bl.total)) {
        std::ostringstream msg;
        msg << "non-finite loss " << bl.total << " at epoch " << epoch + 1 << ", batch " << batches + 1;
        throw Error(ErrorKind::non_finite_loss, msg.str());
      }
      const auto gblocks = std::as_const(grads).parameter_blocks();
      const auto pblocks = model.parameter_blocks();
      adam_step(pblocks, gblocks, st.adam, lr);
      loss_sum += bl.total;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(batches);
    rec.lr = lr;
    st.schedule.update(rec.loss);
    st.epoch = epoch + 1;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.push_back(rec);
    if (on_epoch && !on_epoch(rec, model, st)) break;
  }
  return log;
}

} // namespace geognn
