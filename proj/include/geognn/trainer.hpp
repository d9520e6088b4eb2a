#pragma once

#include "geognn/gnn.hpp"
#include "geognn/graph.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace geognn {

/// Mean absolute error over every entry plus lambda * sum |theta|.
double loss(const Matrix& predictions, const Matrix& targets,
            std::span<const std::span<const double>> parameters, double l1_coefficient);

double l1_norm(std::span<const std::span<const double>> parameters);

struct BatchLoss {
  double total = 0.0;
  double data = 0.0;  // MAE term
  double l1 = 0.0;    // lambda * sum |theta|
};

/// Batch loss on the merged graph, accumulating its gradient into `grads`.
/// Node-level models are supervised on node targets, graph-level models on
/// graph targets.
BatchLoss loss_and_gradient(const GnnModel& model, const BatchedGraph& batch, double l1_coefficient,
                            GnnModel& grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected ADAM update. Moment buffers are allocated on the
/// first call to mirror the parameter blocks.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr);

struct PlateauConfig {
  double factor = 0.5;
  std::int64_t patience = 50;  // epochs without improvement before a cut
  double min_delta = 1e-5;     // relative improvement that counts
  double min_lr = 0.0;
};

/// Reduce-on-plateau schedule judged on the epoch training loss.
class PlateauSchedule {
public:
  PlateauSchedule() = default;
  PlateauSchedule(PlateauConfig config, double initial_lr);

  /// Records one epoch loss and returns the learning rate for the next epoch.
  double update(double epoch_loss);

  double lr() const { return lr_; }
  double best() const { return best_; }
  std::int64_t bad_epochs() const { return bad_epochs_; }
  const PlateauConfig& config() const { return config_; }

  void restore(double lr, double best, std::int64_t bad_epochs);

private:
  PlateauConfig config_;
  double lr_ = 0.0;
  double best_ = 0.0;
  bool has_best_ = false;
  std::int64_t bad_epochs_ = 0;
};

struct TrainConfig {
  std::int64_t epochs = 1;
  std::int64_t batch_size = 1;
  double initial_lr = 5e-4;
  double l1_coefficient = 1e-5;
  std::int64_t patience = 50;
  double factor = 0.5;
  double min_delta = 1e-5;
  double min_lr = 5e-4 / 64.0;
  std::uint64_t seed = 0;
  AdamConfig adam;

  void validate() const;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

using TrainLog = std::vector<EpochRecord>;

/// Everything needed to resume training exactly.
struct TrainState {
  std::int64_t epoch = 0;  // completed epochs
  AdamState adam;
  PlateauSchedule schedule;
};

/// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord&, const GnnModel&, const TrainState&)>;

/// Minibatch training. Each epoch shuffles with a generator seeded from
/// (seed, epoch), merges each batch into one disconnected graph, takes one
/// ADAM step per batch and updates the learning rate at the end.
TrainLog fit(GnnModel& model, std::span<const Graph> dataset, const TrainConfig& config,
             TrainState* state = nullptr, const EpochCallback& on_epoch = {});

} // namespace geognn
