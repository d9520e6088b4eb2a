#include "geognn/evaluator.hpp"

#include "geognn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace geognn {

double relative_l2(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) {
    throw Error(ErrorKind::shape_mismatch, "relative L2: target has " + std::to_string(target.size()) +
                                               " entries, prediction " + std::to_string(predicted.size()));
  }
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double d = target[k] - predicted[k];
    diff += d * d;
    norm += target[k] * target[k];
  }
  if (!(norm > 0.0)) throw Error(ErrorKind::undefined_metric, "relative L2 error of a zero-norm target");
  return std::sqrt(diff) / std::sqrt(norm) * 100.0;
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::empty_input, "cannot summarise an empty error list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return {median, values.front(), values.back()};
}

namespace {

std::span<const double> flat(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

void track_range(EvalReport& report, Index n, bool first) {
  report.min_nodes = first ? n : std::min(report.min_nodes, n);
  report.max_nodes = first ? n : std::max(report.max_nodes, n);
}

} // namespace

EvalReport evaluate_node_level(const GnnModel& model, std::span<const Sample> samples, const std::string& split) {
  if (model.config().task != TaskMode::node_level) {
    throw Error(ErrorKind::config, "node-level evaluation of a graph-level model");
  }
  EvalReport report;
  report.split = split;
  report.task = TaskMode::node_level;
  std::vector<double> values;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    track_range(report, s.graph.num_nodes(), k == 0);
    GraphError entry{s.id, s.graph.num_nodes(), std::nullopt, {}};
    Matrix target;
    if (s.physical_node_targets) {
      target = *s.physical_node_targets;
    } else if (s.graph.node_targets) {
      target = s.to_physical(*s.graph.node_targets);
    } else {
      throw Error(ErrorKind::shape_mismatch, "graph '" + s.id + "' has no node targets");
    }
    const Matrix predicted = s.to_physical(*model.predict(s.graph).node);
    try {
      entry.eps_r = relative_l2(flat(target), flat(predicted));
      values.push_back(*entry.eps_r);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_metric) throw;
      entry.error = e.what();
    }
    report.per_graph.push_back(std::move(entry));
  }
  if (!values.empty()) report.summary = summarize(std::move(values));
  return report;
}

EvalReport evaluate_graph_level(const GnnModel& model, std::span<const Sample> samples, const std::string& split) {
  EvalReport report;
  report.split = split;
  report.task = TaskMode::graph_level;
  std::vector<double> all_targets;
  std::vector<double> all_predictions;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    if (!s.graph.graph_target) throw Error(ErrorKind::shape_mismatch, "graph '" + s.id + "' has no graph target");
    track_range(report, s.graph.num_nodes(), k == 0);
    const Matrix predicted = model.predict(s.graph).graph;
    const Vector& target = *s.graph.graph_target;
    if (predicted.size() != target.size()) {
      throw Error(ErrorKind::shape_mismatch, "graph target arity does not match the graph decoder");
    }
    GraphError entry{s.id, s.graph.num_nodes(), std::nullopt, {}};
    try {
      entry.eps_r = relative_l2({target.data(), static_cast<std::size_t>(target.size())}, flat(predicted));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_metric) throw;
      entry.error = e.what();
    }
    report.per_graph.push_back(std::move(entry));
    all_targets.insert(all_targets.end(), target.data(), target.data() + target.size());
    all_predictions.insert(all_predictions.end(), predicted.data(), predicted.data() + predicted.size());
  }
  if (!all_targets.empty()) report.pooled = relative_l2(all_targets, all_predictions);
  return report;
}

EvalReport evaluate(const GnnModel& model, std::span<const Sample> samples, const std::string& split) {
  return model.config().task == TaskMode::node_level ? evaluate_node_level(model, samples, split)
                                                     : evaluate_graph_level(model, samples, split);
}

std::string format_error_cell(const EvalReport& report) {
  char buf[96];
  if (report.task == TaskMode::graph_level) {
    if (!report.pooled) return "-";
    std::snprintf(buf, sizeof buf, "%.2f%%", *report.pooled);
    return buf;
  }
  if (!report.summary) return "-";
  std::snprintf(buf, sizeof buf, "%.2f%% (%.1f, %.1f)", report.summary->median, report.summary->min,
                report.summary->max);
  return buf;
}

std::string format_node_range(Index min_nodes, Index max_nodes) {
  if (min_nodes == max_nodes) return std::to_string(min_nodes) + " nodes";
  return std::to_string(min_nodes) + "–" + std::to_string(max_nodes) + " nodes";
}

void write_report_table(std::ostream& out, std::span<const EvalReport> reports) {
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-12s %-8s %-18s %s\n", "split", "output", "samples", "nodes",
                "eps_R median (min., max.)");
  out << line;
  for (const auto& r : reports) {
    // The en dash is three bytes but one column wide.
    const std::string range = format_node_range(r.min_nodes, r.max_nodes);
    const int pad = range.find("–") != std::string::npos ? 20 : 18;
    std::snprintf(line, sizeof line, "%-8s %-12s %-8zu %-*s %s\n", r.split.c_str(), to_string(r.task),
                  r.per_graph.size(), pad, range.c_str(), format_error_cell(r).c_str());
    out << line;
  }
}

void write_per_graph_csv(std::ostream& out, const EvalReport& report) {
  out << "graph_id,num_nodes,eps_r_percent\n";
  char value[64];
  for (const auto& g : report.per_graph) {
    out << g.id << ',' << g.num_nodes << ',';
    if (g.eps_r) {
      std::snprintf(value, sizeof value, "%.17g", *g.eps_r);
      out << value;
    }
    out << '\n';
  }
}

} // namespace geognn
