#include "geognn/error.hpp"
#include "geognn/evaluator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace geognn;

namespace {

double rel(std::vector<double> t, std::vector<double> p) { return relative_l2(t, p); }

Sample sample_from(const std::string& id, Graph g) {
  Sample s;
  s.id = id;
  s.physical_node_targets = g.node_targets;
  s.target_scale = Vector::Ones(g.node_targets ? g.node_targets->cols() : 1);
  s.target_shift = Vector::Zero(s.target_scale.size());
  s.graph = std::move(g);
  return s;
}

} // namespace

TEST_CASE("relative L2 error") {
  CHECK(rel({3, 4}, {3, 4}) == 0.0);
  CHECK(std::abs(rel({3, 4}, {0, 0}) - 100.0) <= 1e-12);
  CHECK(std::abs(rel({3, 4}, {3, 0}) - 80.0) <= 1e-12);
  CHECK(std::abs(rel({1, 2}, {1, 0}) - 200.0 / std::sqrt(5.0)) <= 1e-12);
  CHECK(std::abs(rel({1, 2}, {1, 0}) - 89.44) < 0.005);
  CHECK_THROWS_AS(rel({0, 0}, {1, 0}), Error);
  CHECK_THROWS_AS(rel({1, 0}, {1}), Error);
  try {
    rel({0.0}, {0.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::undefined_metric);
  }
}

TEST_CASE("relative L2 is scale invariant and continuous at zero error") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix t = testing::random_matrix(rng, 10, 1);
    const Matrix p = testing::random_matrix(rng, 10, 1);
    const double base = relative_l2({t.data(), 10}, {p.data(), 10});
    const double c = std::uniform_real_distribution<double>(-50, 50)(rng);
    const Matrix ct = c * t, cp = c * p;
    CHECK(std::abs(relative_l2({ct.data(), 10}, {cp.data(), 10}) - base) <= 1e-10 * std::max(1.0, base));
  }
  const Matrix t = testing::random_matrix(rng, 10, 1);
  double last = 1e300;
  for (double eps : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const Matrix p = t.array() + eps;
    const double e = relative_l2({t.data(), 10}, {p.data(), 10});
    CHECK(e < last);
    last = e;
  }
  CHECK(last < 1e-6);
}

TEST_CASE("summary: median, min, max") {
  const Summary s = summarize({20.0, 5.0, 10.0});
  CHECK(s.median == 10.0);
  CHECK(s.min == 5.0);
  CHECK(s.max == 20.0);
  CHECK(summarize({4.0, 1.0, 3.0, 2.0}).median == 2.5);
  CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("node-level evaluation") {
  std::mt19937_64 rng(2);
  const GnnModel model = init_model(testing::tiny_config(3, 2), 3);

  SUBCASE("exact predictions give 0% everywhere") {
    std::vector<Sample> samples;
    for (int k = 0; k < 3; ++k) {
      Graph g = testing::random_graph(rng, 5 + k);
      g.node_targets = *model.predict(g).node;
      samples.push_back(sample_from("g" + std::to_string(k), g));
    }
    const EvalReport r = evaluate_node_level(model, samples, "train");
    REQUIRE(r.summary);
    CHECK(r.summary->median == 0.0);
    CHECK(r.summary->min == 0.0);
    CHECK(r.summary->max == 0.0);
    CHECK(r.min_nodes == 5);
    CHECK(r.max_nodes == 7);
    CHECK(format_error_cell(r) == "0.00% (0.0, 0.0)");
  }
  SUBCASE("copies of one graph give a degenerate summary") {
    const Graph g = testing::random_graph(rng, 6);
    const std::vector<Sample> samples(4, sample_from("same", g));
    const EvalReport r = evaluate_node_level(model, samples);
    CHECK(r.summary->median == r.summary->min);
    CHECK(r.summary->max == r.summary->min);
    CHECK(r.per_graph.size() == 4);
  }
  SUBCASE("errors are measured in physical units") {
    Graph g = testing::random_graph(rng, 6);
    const Matrix pred = *model.predict(g).node;
    Sample s = sample_from("scaled", g);
    s.target_scale = Vector::Constant(1, 3.0);
    s.target_shift = Vector::Constant(1, -1.0);
    s.physical_node_targets = (pred.array() * 3.0 - 1.0).matrix();
    const EvalReport r = evaluate_node_level(model, std::vector<Sample>{s});
    CHECK(r.summary->median <= 1e-12);
  }
  SUBCASE("a zero-norm target is reported and skipped") {
    Graph good = testing::random_graph(rng, 5);
    Graph zero = testing::random_graph(rng, 5);
    zero.node_targets->setZero();
    const std::vector<Sample> samples{sample_from("good", good), sample_from("zero", zero)};
    const EvalReport r = evaluate_node_level(model, samples);
    REQUIRE(r.per_graph.size() == 2);
    CHECK(r.per_graph[0].eps_r);
    CHECK_FALSE(r.per_graph[1].eps_r);
    CHECK_FALSE(r.per_graph[1].error.empty());
    CHECK(r.summary->median == *r.per_graph[0].eps_r);
  }
}

TEST_CASE("graph-level evaluation pools every prediction into one value") {
  std::mt19937_64 rng(4);
  GnnModel model = init_model(testing::tiny_config(3, 2, TaskMode::graph_level), 5);
  std::vector<Sample> samples;
  for (int k = 0; k < 3; ++k) {
    Graph g = testing::random_graph(rng, 4 + k);
    g.graph_target = model.predict(g).graph.row(0).transpose();
    samples.push_back(sample_from("g" + std::to_string(k), g));
  }
  EvalReport r = evaluate_graph_level(model, samples);
  REQUIRE(r.pooled);
  CHECK(*r.pooled == 0.0);
  CHECK(format_error_cell(r) == "0.00%");

  for (Mlp* m : model.mlps()) m->set_zero();
  r = evaluate(model, samples);
  CHECK(std::abs(*r.pooled - 100.0) <= 1e-12);
}

TEST_CASE("report formatting") {
  EvalReport r;
  r.task = TaskMode::node_level;
  r.summary = Summary{8.71, 5.9, 11.8};
  CHECK(format_error_cell(r) == "8.71% (5.9, 11.8)");
  r.task = TaskMode::graph_level;
  r.pooled = 8.41;
  CHECK(format_error_cell(r) == "8.41%");
  CHECK(format_node_range(194, 660) == "194–660 nodes");

  EvalReport csv;
  csv.per_graph = {{"a", 10, 1.5, {}}, {"b", 12, std::nullopt, "zero-norm target"}};
  std::ostringstream out;
  write_per_graph_csv(out, csv);
  CHECK(out.str().rfind("graph_id,num_nodes,eps_r_percent\n", 0) == 0);
  CHECK(out.str().find("a,10,1.5\n") != std::string::npos);
  CHECK(out.str().find("b,12,") != std::string::npos);

  EvalReport table;
  table.split = "test1";
  table.task = TaskMode::node_level;
  table.summary = Summary{8.71, 5.9, 11.8};
  table.per_graph.resize(12);
  table.min_nodes = 194;
  table.max_nodes = 660;
  std::ostringstream t;
  write_report_table(t, std::span<const EvalReport>(&table, 1));
  CHECK(t.str().find("8.71% (5.9, 11.8)") != std::string::npos);
  CHECK(t.str().find("194–660 nodes") != std::string::npos);
  CHECK(t.str().find("test1") != std::string::npos);
}
