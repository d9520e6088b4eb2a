#include "geognn/error.hpp"
#include "geognn/trainer.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace geognn;

namespace {

std::vector<std::span<const double>> view(const std::vector<double>& v) {
  return {std::span<const double>(v)};
}

} // namespace

TEST_CASE("loss: MAE plus lambda times the parameter L1 norm") {
  const std::vector<double> none;
  CHECK(loss(Matrix::Ones(3, 2), Matrix::Ones(3, 2), view(none), 0.0) == 0.0);

  Matrix pred(2, 1);
  pred << 1, 3;
  CHECK(loss(pred, Matrix::Zero(2, 1), view(none), 0.0) == 2.0);

  const std::vector<double> theta{-2.0};
  CHECK(loss(Matrix::Zero(1, 1), Matrix::Zero(1, 1), view(theta), 0.1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(l1_norm(view(std::vector<double>{1.0, -2.5, 0.0})) == 3.5);

  CHECK_THROWS_AS(loss(Matrix::Zero(2, 1), Matrix::Zero(3, 1), view(none), 0.0), Error);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  AdamState st;
  const std::vector<std::span<double>> params{std::span<double>(p)};
  const std::vector<std::span<const double>> grads{std::span<const double>(g)};
  adam_step(params, grads, st, 1e-3);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(st.step == 1);
}

TEST_CASE("adam: first step moves each coordinate by lr against the gradient sign") {
  // At t = 1 the bias-corrected ratio is g / (|g| + eps), so |delta| = lr
  // up to eps / |g|.
  std::vector<double> p{0.0, 0.0, 0.0, 0.0};
  const std::vector<double> g{0.5, -3.0, 1e-2, -40.0};
  AdamState st;
  const std::vector<std::span<double>> params{std::span<double>(p)};
  const std::vector<std::span<const double>> grads{std::span<const double>(g)};
  const double lr = 5e-4;
  adam_step(params, grads, st, lr);
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(std::abs(std::abs(p[k]) - lr) <= 1e-6 * lr);
    CHECK((p[k] < 0) == (g[k] > 0));
  }
}

TEST_CASE("adam: matches the textbook recurrence over several steps") {
  std::vector<double> p{0.3};
  AdamState st;
  const std::vector<std::span<double>> params{std::span<double>(p)};
  double m = 0.0, v = 0.0, theta = 0.3;
  const double gs[] = {0.2, -0.1, 0.4, 0.05};
  for (int t = 1; t <= 4; ++t) {
    const std::vector<double> g{gs[t - 1]};
    const std::vector<std::span<const double>> grads{std::span<const double>(g)};
    adam_step(params, grads, st, 1e-2);
    m = 0.9 * m + 0.1 * g[0];
    v = 0.999 * v + 0.001 * g[0] * g[0];
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    theta -= 1e-2 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p[0] == doctest::Approx(theta).epsilon(1e-13));
  }
}

TEST_CASE("plateau schedule") {
  const PlateauConfig cfg{0.5, 3, 1e-5, 5e-4 / 64.0};
  SUBCASE("strictly decreasing loss keeps the initial rate") {
    PlateauSchedule s(cfg, 5e-4);
    for (int e = 0; e < 20; ++e) CHECK(s.update(1.0 - 0.01 * e) == 5e-4);
  }
  SUBCASE("constant loss for patience + 1 epochs halves the rate") {
    PlateauSchedule s(cfg, 5e-4);
    for (int e = 0; e < 3; ++e) CHECK(s.update(1.0) == 5e-4);
    CHECK(s.update(1.0) == 2.5e-4);
  }
  SUBCASE("improvements below min_delta do not count") {
    PlateauSchedule s(cfg, 5e-4);
    s.update(1.0);
    s.update(1.0 - 1e-7);
    s.update(1.0 - 2e-7);
    CHECK(s.update(1.0 - 3e-7) == 2.5e-4);
  }
  SUBCASE("never below the floor and never increasing") {
    PlateauSchedule s(cfg, 5e-4);
    double last = s.lr();
    for (int e = 0; e < 200; ++e) {
      const double lr = s.update(1.0);
      CHECK(lr <= last);
      CHECK(lr >= cfg.min_lr);
      last = lr;
    }
    CHECK(last == cfg.min_lr);
  }
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.initial_lr = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.factor = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.l1_coefficient = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("merged-batch gradient is the node-weighted sum of per-graph gradients") {
  std::mt19937_64 rng(1);
  const GnnModel model = init_model(testing::tiny_config(3, 2), 2);
  std::vector<Graph> members;
  for (int k = 0; k < 3; ++k) members.push_back(testing::random_graph(rng, 3 + 3 * k));
  const BatchedGraph batch = merge_batch(members);
  const double lambda = 1e-3;
  GnnModel joint = model.zeros_like();
  loss_and_gradient(model, batch, lambda, joint);

  const double total = static_cast<double>(batch.graph.num_nodes());
  std::vector<double> combined(static_cast<std::size_t>(model.parameter_count()), 0.0);
  for (const Graph& g : members) {
    GnnModel part = model.zeros_like();
    const std::vector<Graph> one{g};
    loss_and_gradient(model, merge_batch(one), 0.0, part);
    const auto flat = testing::flatten(std::as_const(part).parameter_blocks());
    for (std::size_t k = 0; k < flat.size(); ++k) combined[k] += static_cast<double>(g.num_nodes()) / total * flat[k];
  }
  const auto theta = testing::flatten(model.parameter_blocks());
  for (std::size_t k = 0; k < theta.size(); ++k) combined[k] += lambda * ((theta[k] > 0) - (theta[k] < 0));
  const auto got = testing::flatten(std::as_const(joint).parameter_blocks());
  for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - combined[k]) <= 1e-8);
}

TEST_CASE("l1 term alone drives parameters toward zero") {
  std::mt19937_64 rng(3);
  GnnModel model = init_model(testing::tiny_config(3, 2, TaskMode::graph_level, 4, 1, 1, 4), 4);
  AdamState st;
  double last = l1_norm(std::as_const(model).parameter_blocks());
  for (int step = 0; step < 50; ++step) {
    // Data term disabled: the gradient is lambda * sign(theta).
    GnnModel grads = model.zeros_like();
    const auto theta = model.parameter_blocks();
    auto gblocks = grads.parameter_blocks();
    for (std::size_t b = 0; b < theta.size(); ++b) {
      for (std::size_t k = 0; k < theta[b].size(); ++k) gblocks[b][k] = 0.1 * ((theta[b][k] > 0) - (theta[b][k] < 0));
    }
    adam_step(theta, std::as_const(grads).parameter_blocks(), st, 1e-3);
    const double now = l1_norm(std::as_const(model).parameter_blocks());
    CHECK(now < last);
    last = now;
  }
}

TEST_CASE("fit: deterministic, keeps the final partial batch, logs each epoch") {
  std::mt19937_64 rng(5);
  std::vector<Graph> data;
  for (int k = 0; k < 5; ++k) data.push_back(testing::random_graph(rng, 6));
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 2;
  cfg.seed = 77;

  GnnModel a = init_model(testing::tiny_config(3, 2), 1);
  GnnModel b = init_model(testing::tiny_config(3, 2), 1);
  TrainState sa;
  const TrainLog la = fit(a, data, cfg, &sa);
  const TrainLog lb = fit(b, data, cfg);
  REQUIRE(la.size() == 6);
  for (std::size_t e = 0; e < la.size(); ++e) {
    CHECK(la[e].epoch == static_cast<std::int64_t>(e + 1));
    CHECK(la[e].loss == lb[e].loss);
    CHECK(la[e].lr == lb[e].lr);
  }
  CHECK(testing::flatten(std::as_const(a).parameter_blocks()) == testing::flatten(std::as_const(b).parameter_blocks()));
  CHECK(sa.adam.step == 6 * 3);  // 5 graphs in batches of 2 -> 3 steps per epoch
}

TEST_CASE("fit: resuming reproduces an uninterrupted run") {
  std::mt19937_64 rng(6);
  std::vector<Graph> data;
  for (int k = 0; k < 4; ++k) data.push_back(testing::random_graph(rng, 5));
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 3;
  GnnModel straight = init_model(testing::tiny_config(3, 2), 2);
  fit(straight, data, cfg);

  GnnModel resumed = init_model(testing::tiny_config(3, 2), 2);
  TrainState state;
  TrainConfig half = cfg;
  half.epochs = 3;
  fit(resumed, data, half, &state);
  fit(resumed, data, cfg, &state);
  CHECK(testing::flatten(std::as_const(straight).parameter_blocks()) ==
        testing::flatten(std::as_const(resumed).parameter_blocks()));
}

TEST_CASE("fit: callback can stop early; errors surface") {
  std::mt19937_64 rng(7);
  std::vector<Graph> data{testing::random_graph(rng, 5)};
  TrainConfig cfg;
  cfg.epochs = 10;
  GnnModel m = init_model(testing::tiny_config(3, 2), 3);
  const TrainLog log = fit(m, data, cfg, nullptr, [](const EpochRecord& r, const GnnModel&, const TrainState&) {
    return r.epoch < 2;
  });
  CHECK(log.size() == 2);

  CHECK_THROWS_AS(fit(m, std::span<const Graph>{}, cfg), Error);

  data[0].node_targets->operator()(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    fit(m, data, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_finite_loss);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    CHECK(std::string(e.what()).find("batch 1") != std::string::npos);
  }
}
