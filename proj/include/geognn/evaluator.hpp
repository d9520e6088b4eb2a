#pragma once

#include "geognn/gnn.hpp"
#include "geognn/sample.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geognn {

/// ||target - predicted||_2 / ||target||_2 * 100. Throws undefined_metric
/// when the target has zero norm.
double relative_l2(std::span<const double> target, std::span<const double> predicted);

struct GraphError {
  std::string id;
  Index num_nodes = 0;
  std::optional<double> eps_r;  // percent; empty when undefined
  std::string error;            // why eps_r is empty
};

struct Summary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Median (mean of the middle two for even counts), min and max.
Summary summarize(std::vector<double> values);

struct EvalReport {
  std::string split;
  TaskMode task = TaskMode::node_level;
  std::vector<GraphError> per_graph;
  std::optional<Summary> summary;  // node level: over per-graph values
  std::optional<double> pooled;    // graph level: one value over all graphs
  Index min_nodes = 0;
  Index max_nodes = 0;
};

/// One eps_R per graph over all its node predictions, in physical units.
EvalReport evaluate_node_level(const GnnModel& model, std::span<const Sample> samples,
                               const std::string& split = "test");

/// A single eps_R over the stacked graph-level predictions of all graphs.
EvalReport evaluate_graph_level(const GnnModel& model, std::span<const Sample> samples,
                                const std::string& split = "test");

EvalReport evaluate(const GnnModel& model, std::span<const Sample> samples, const std::string& split = "test");

/// "8.71% (5.9, 11.8)" for node-level reports, "8.41%" for graph-level.
std::string format_error_cell(const EvalReport& report);

/// "194–660 nodes" style range.
std::string format_node_range(Index min_nodes, Index max_nodes);

/// Table with split, sample count, node range and the error cell.
void write_report_table(std::ostream& out, std::span<const EvalReport> reports);

/// graph_id,num_nodes,eps_r_percent
void write_per_graph_csv(std::ostream& out, const EvalReport& report);

} // namespace geognn
