#include "geognn/cli.hpp"

#include "geognn/checkpoint.hpp"
#include "geognn/config.hpp"
#include "geognn/error.hpp"
#include "geognn/evaluator.hpp"
#include "geognn/record.hpp"
#include "geognn/selig.hpp"
#include "geognn/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

namespace geognn {

namespace fs = std::filesystem;

namespace {

struct GenArgs {
  std::string config;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string preset;
  std::string data;
  std::string out;
  std::string resume;
  std::string log;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split;
  std::string csv;
};

struct PredictArgs {
  std::string model;
  std::string graph;
  std::string selig;
  std::vector<double> freestream;
  std::string out;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
  return f;
}

// Written to a sibling file first so an interrupted run never leaves a
// truncated checkpoint behind.
void save_atomically(const fs::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  save_checkpoint(tmp, ckpt);
  fs::rename(tmp, path);
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const SyntheticConfig cfg = load_synthetic_config(a.config);
  const std::vector<GraphRecord> all = generate_synthetic(cfg.spec);
  const auto split = all.begin() + cfg.train_count;
  const std::vector<GraphRecord> train(all.begin(), split);
  const std::vector<GraphRecord> test(split, all.end());
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_dataset(dir / "train.jsonl", train);
  write_dataset(dir / "test.jsonl", test);
  out << "wrote " << train.size() << " train and " << test.size() << " test graphs (" << to_string(cfg.spec.family)
      << ") to " << dir.string() << "\n";
  return 0;
}

std::vector<std::string> vocabulary_of(const std::vector<GraphRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    for (const auto& labels : r.cell_types) seen.insert(labels.begin(), labels.end());
  }
  if (seen.empty()) throw Error(ErrorKind::vocabulary, "no cell-type labels found to derive a vocabulary from");
  return {seen.begin(), seen.end()};
}

Index node_target_arity(const std::vector<GraphRecord>& records) {
  Index arity = 0;
  for (const auto& r : records) {
    const Index a = r.node_targets ? r.node_targets->cols() : 0;
    if (&r != &records.front() && a != arity) {
      throw Error(ErrorKind::shape_mismatch, "record '" + r.id + "' has a different node target arity");
    }
    arity = a;
  }
  return arity;
}

Index graph_target_arity(const std::vector<GraphRecord>& records) {
  Index arity = 0;
  for (const auto& r : records) {
    const Index a = r.graph_targets ? r.graph_targets->size() : 0;
    if (&r != &records.front() && a != arity) {
      throw Error(ErrorKind::shape_mismatch, "record '" + r.id + "' has a different graph target arity");
    }
    arity = a;
  }
  return arity;
}

std::string epoch_line(const EpochRecord& rec) {
  nlohmann::ordered_json j;
  j["epoch"] = rec.epoch;
  j["loss"] = rec.loss;
  j["lr"] = rec.lr;
  return j.dump();
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = !a.config.empty() ? load_run_config(a.config)
                                    : preset_config(a.preset.empty() ? "airfoil_pressure" : a.preset);
  if (a.seed) cfg.training.seed = *a.seed;

  const std::vector<GraphRecord> records = read_dataset(fs::path(a.data));
  if (records.empty()) throw Error(ErrorKind::empty_input, a.data + " contains no graphs");

  std::optional<Checkpoint> ckpt;
  if (!a.resume.empty()) {
    ckpt = load_checkpoint(fs::path(a.resume));
    if (!ckpt->train_state) throw Error(ErrorKind::config, a.resume + " carries no training state to resume from");
  } else {
    if (cfg.derive_cell_types) cfg.features.cell_types = vocabulary_of(records);
    FeaturePipeline pipeline = FeaturePipeline::fit(records, cfg.features);
    const GnnConfig model_cfg =
        resolve_model_config(cfg, pipeline, node_target_arity(records), graph_target_arity(records));
    ckpt = Checkpoint{init_model(model_cfg, cfg.training.seed), std::move(pipeline), TrainState{}};
  }

  std::vector<Graph> graphs;
  graphs.reserve(records.size());
  for (auto& s : ckpt->pipeline.featurize(records)) graphs.push_back(std::move(s.graph));

  const fs::path out_path(a.out);
  std::ofstream log;
  if (!a.log.empty()) {
    const fs::path log_path(a.log);
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    log.open(log_path, a.resume.empty() ? std::ios::trunc : std::ios::app);
    if (!log) throw Error(ErrorKind::io, "cannot write " + a.log);
  }

  const std::int64_t total = cfg.training.epochs;
  const std::int64_t report_every = std::max<std::int64_t>(1, total / 20);
  double elapsed = 0.0;
  auto on_epoch = [&](const EpochRecord& rec, const GnnModel& model, const TrainState& state) {
    if (log.is_open()) log << epoch_line(rec) << "\n" << std::flush;
    elapsed += rec.seconds;
    if (!a.quiet && (rec.epoch % report_every == 0 || rec.epoch == total)) {
      char line[160];
      std::snprintf(line, sizeof line, "epoch %lld/%lld  loss %.6g  lr %.3g  %.1f s\n",
                    static_cast<long long>(rec.epoch), static_cast<long long>(total), rec.loss, rec.lr, elapsed);
      err << line;
    }
    if (cfg.checkpoint_every > 0 && rec.epoch % cfg.checkpoint_every == 0 && rec.epoch < total) {
      save_atomically(out_path, Checkpoint{model, ckpt->pipeline, state});
    }
    return true;
  };

  TrainState& state = *ckpt->train_state;
  const TrainLog history = fit(ckpt->model, graphs, cfg.training, &state, on_epoch);
  save_atomically(out_path, *ckpt);

  out << "trained " << history.size() << " epochs on " << graphs.size() << " graphs";
  if (!history.empty()) out << ", final loss " << history.back().loss;
  out << "\ncheckpoint: " << out_path.string() << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(fs::path(a.model));
  const std::vector<GraphRecord> records = read_dataset(fs::path(a.data));
  if (records.empty()) throw Error(ErrorKind::empty_input, a.data + " contains no graphs");
  const std::vector<Sample> samples = ckpt.pipeline.featurize(records);
  const std::string split = a.split.empty() ? fs::path(a.data).stem().string() : a.split;
  const EvalReport report = evaluate(ckpt.model, samples, split);
  write_report_table(out, std::span<const EvalReport>(&report, 1));
  for (const auto& g : report.per_graph) {
    if (!g.eps_r) out << "skipped " << g.id << ": " << g.error << "\n";
  }
  if (!a.csv.empty()) {
    std::ofstream csv = open_output(a.csv);
    write_per_graph_csv(csv, report);
  }
  return 0;
}

// A Selig file lists the trailing edge at both ends; the duplicate is
// dropped and the surface is closed instead.
GraphRecord record_from_selig(const SeligAirfoil& foil, double u0, double v0) {
  GraphRecord r;
  r.id = foil.name.empty() ? "airfoil" : foil.name;
  r.topology = TopologyKind::chain;
  r.closed = true;
  Index n = foil.points.rows();
  if (n > 3 && foil.points.row(0) == foil.points.row(n - 1)) --n;
  r.positions = foil.points.topRows(n);
  r.upper.assign(foil.upper.begin(), foil.upper.begin() + n);
  r.freestream = std::array<double, 2>{u0, v0};
  return r;
}

void write_predictions(std::ostream& out, const Checkpoint& ckpt, const std::vector<GraphRecord>& records) {
  const GnnConfig& mc = ckpt.model.config();
  out.precision(17);
  if (mc.task == TaskMode::node_level) {
    out << "graph_id,node";
    for (Index k = 0; k < mc.node_output_size; ++k) out << ",node_pred_" << k;
    out << "\n";
  } else {
    out << "graph_id";
    for (Index k = 0; k < mc.graph_output_size; ++k) out << ",graph_pred_" << k;
    out << "\n";
  }
  for (const auto& r : records) {
    const Sample s = ckpt.pipeline.featurize(r);
    const Prediction p = ckpt.model.predict(s.graph);
    if (mc.task == TaskMode::node_level) {
      const Matrix values = s.to_physical(*p.node);
      for (Index i = 0; i < values.rows(); ++i) {
        out << r.id << "," << i;
        for (Index k = 0; k < values.cols(); ++k) out << "," << values(i, k);
        out << "\n";
      }
    } else {
      out << r.id;
      for (Index k = 0; k < p.graph.cols(); ++k) out << "," << p.graph(0, k);
      out << "\n";
    }
  }
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(fs::path(a.model));
  std::vector<GraphRecord> records;
  if (!a.graph.empty()) {
    records = read_dataset(fs::path(a.graph));
    if (records.empty()) throw Error(ErrorKind::empty_input, a.graph + " contains no graphs");
  } else {
    if (a.freestream.size() != 2) throw Error(ErrorKind::config, "--freestream expects u0,v0");
    records.push_back(record_from_selig(read_selig(a.selig), a.freestream[0], a.freestream[1]));
  }
  if (a.out.empty()) {
    write_predictions(out, ckpt, records);
  } else {
    std::ofstream f = open_output(a.out);
    write_predictions(f, ckpt, records);
  }
  return 0;
}

bool has_checkpoint_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  char magic[sizeof checkpoint_magic] = {};
  in.read(magic, sizeof magic);
  return in.gcount() == sizeof magic && std::equal(magic, magic + sizeof magic, checkpoint_magic);
}

void inspect_checkpoint(const fs::path& path, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(path);
  const GnnConfig& c = ckpt.model.config();
  const FeaturePipeline& p = ckpt.pipeline;
  out << "checkpoint " << path.string() << " (version " << checkpoint_version << ")\n";
  out << "  task            " << to_string(c.task) << "\n";
  out << "  parameters      " << ckpt.model.parameter_count() << "\n";
  out << "  latent size     " << c.latent_size << ", steps " << c.steps << "\n";
  auto shape = [&](const char* name, const MlpShape& s) {
    out << "  " << name << "depth " << s.depth << ", width " << s.width << "\n";
  };
  shape("encoder         ", c.encoder);
  shape("processor       ", c.processor);
  shape("graph decoder   ", c.graph_decoder);
  shape("node decoder    ", c.node_decoder);
  out << "  outputs         graph " << c.graph_output_size << " (" << to_string(c.graph_output_activation)
      << "), node " << c.node_output_size << " (" << to_string(c.node_output_activation) << ")\n";
  out << "  encoding        " << to_string(p.encoding) << "\n";
  out << "  feature widths  node " << c.node_input_size << ", edge " << c.edge_input_size << "\n";
  if (p.encoding == Encoding::feature_design) {
    out << "  cell types      ";
    for (std::size_t k = 0; k < p.options.cell_types.size(); ++k) out << (k ? "," : "") << p.options.cell_types[k];
    out << "\n";
  }
  out << "  target scaling  " << to_string(p.options.target_scaling);
  if (p.options.target_scaling == TargetScaling::pressure) {
    out << " (" << (p.options.velocity == VelocityDivisor::speed ? "speed" : "squared_speed") << ")";
  }
  out << "\n";
  if (ckpt.train_state) {
    out << "  trained epochs  " << ckpt.train_state->epoch << ", lr " << ckpt.train_state->schedule.lr() << "\n";
  }
}

void inspect_dataset(const fs::path& path, std::ostream& out) {
  const std::vector<GraphRecord> records = read_dataset(path);
  out << "dataset " << path.string() << "\n";
  out << "  graphs          " << records.size() << "\n";
  if (records.empty()) return;
  const Encoding enc = detect_encoding(records);
  Index lo = records.front().num_nodes();
  Index hi = lo;
  std::size_t edges = 0;
  for (const auto& r : records) {
    lo = std::min(lo, r.num_nodes());
    hi = std::max(hi, r.num_nodes());
    edges += static_cast<std::size_t>(r.build_topology().num_edges());
  }
  const Index dim = records.front().positions.cols();
  out << "  topology        " << (enc == Encoding::airfoil ? "surface chain" : "mesh") << ", " << dim << "-D\n";
  out << "  node range      " << format_node_range(lo, hi) << "\n";
  out << "  directed edges  " << edges << "\n";
  if (enc == Encoding::airfoil) {
    out << "  feature widths  node " << airfoil_width << ", edge " << dim + 1 << "\n";
  } else {
    std::set<std::string> labels;
    for (const auto& r : records) {
      for (const auto& l : r.cell_types) labels.insert(l.begin(), l.end());
    }
    out << "  cell types      ";
    bool first = true;
    for (const auto& l : labels) {
      out << (first ? "" : ",") << l;
      first = false;
    }
    out << "\n  feature widths  node " << feature_design_width(static_cast<Index>(labels.size())) << ", edge "
        << dim + 1 << "\n";
  }
  out << "  node targets    " << node_target_arity(records) << " per node\n";
  out << "  graph targets   " << graph_target_arity(records) << " per graph\n";
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  if (has_checkpoint_magic(path)) inspect_checkpoint(path, out);
  else inspect_dataset(path, out);
  return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph neural network surrogates for mesh and airfoil data", "geognn"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset (train.jsonl, test.jsonl)");
  gen_cmd->add_option("--config", gen.config, "INI file with a [synthetic] section")->required();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  auto* config_opt = train_cmd->add_option("--config", train.config, "INI file with model/training settings");
  train_cmd->add_option("--preset", train.preset, "Preset used when no --config is given")->excludes(config_opt);
  train_cmd->add_option("--data", train.data, "Training dataset (JSONL)")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--seed", train.seed, "Overrides [training] seed");
  train_cmd->add_option("--resume", train.resume, "Checkpoint to continue training from");
  train_cmd->add_option("--log", train.log, "Per-epoch log (JSON lines)");
  train_cmd->add_flag("--quiet", train.quiet, "No progress lines");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Report relative L2 errors of a checkpoint on a dataset");
  eval_cmd->add_option("--model", ev.model, "Checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset (JSONL)")->required();
  eval_cmd->add_option("--split", ev.split, "Split label for the report (default: file stem)");
  eval_cmd->add_option("--csv", ev.csv, "Per-graph CSV output");

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Predict node or graph outputs as CSV");
  predict_cmd->add_option("--model", pr.model, "Checkpoint")->required();
  auto* graph_opt = predict_cmd->add_option("--graph", pr.graph, "Dataset file with the graph(s) to predict");
  auto* selig_opt = predict_cmd->add_option("--selig", pr.selig, "Selig airfoil coordinate file");
  graph_opt->excludes(selig_opt);
  selig_opt->excludes(graph_opt);
  predict_cmd->add_option("--freestream", pr.freestream, "u0,v0 for --selig")->delimiter(',')->expected(2);
  predict_cmd->add_option("--out", pr.out, "CSV output (default: stdout)");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a dataset or checkpoint");
  inspect_cmd->add_option("path", inspect_path, "Dataset or checkpoint file")->required();

  std::vector<const char*> argv{"geognn"};
  for (const auto& s : args) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (*predict_cmd && pr.graph.empty() && pr.selig.empty()) {
      throw CLI::ValidationError("predict needs --graph or --selig");
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*train_cmd) return cmd_train(train, out, err);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*predict_cmd) return cmd_predict(pr, out);
    if (*inspect_cmd) return cmd_inspect(inspect_path, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

} // namespace geognn
