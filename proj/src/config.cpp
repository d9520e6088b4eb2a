#include "geognn/config.hpp"

#include "geognn/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace geognn {

namespace pt = boost::property_tree;

namespace {

RunConfig make_preset(Index depth, Index width, Index latent, Index steps, Index graph_out, TaskMode task,
                      Activation node_head, std::int64_t epochs, std::int64_t batch, double lr) {
  RunConfig c;
  c.model.latent_size = latent;
  c.model.steps = steps;
  c.model.encoder = c.model.processor = c.model.graph_decoder = c.model.node_decoder = MlpShape{depth, width};
  c.model.task = task;
  c.model.node_output_activation = node_head;
  // Graph-level heads follow the data arity.
  if (task == TaskMode::node_level) c.graph_output_size = graph_out;
  c.training.epochs = epochs;
  c.training.batch_size = batch;
  c.training.initial_lr = lr;
  c.training.min_lr = lr / 64.0;
  return c;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

pt::ptree parse_ini(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
  }
  return tree;
}

void check_keys(const pt::ptree& tree, const std::map<std::string, std::set<std::string>>& allowed) {
  for (const auto& [section, body] : tree) {
    auto it = allowed.find(section);
    if (it == allowed.end()) throw Error(ErrorKind::config, "unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorKind::config, "key '" + section + "' must live inside a section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw Error(ErrorKind::config, "unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
}

template <typename T>
void read(const pt::ptree& tree, const std::string& path, T& target) {
  const auto node = tree.get_optional<std::string>(path);
  if (!node) return;
  std::istringstream in(*node);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw Error(ErrorKind::config, "bad value '" + *node + "' for " + path);
  }
  target = value;
}

template <typename T>
std::optional<T> read_optional(const pt::ptree& tree, const std::string& path) {
  if (!tree.get_optional<std::string>(path)) return std::nullopt;
  T value{};
  read(tree, path, value);
  return value;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorKind::config, "bad boolean '" + s + "' for " + key);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace

std::vector<std::string> preset_names() {
  return {"residual_stress", "airfoil_pressure", "airfoil_drag", "airfoil_lift"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "residual_stress") {
    c = make_preset(4, 64, 64, 6, 4, TaskMode::node_level, Activation::relu, 2000, 16, 5e-4);
    c.features.target_scaling = TargetScaling::scale;
  } else if (name == "airfoil_pressure") {
    c = make_preset(5, 64, 64, 5, 4, TaskMode::node_level, Activation::linear, 3000, 32, 5e-4);
    c.features.target_scaling = TargetScaling::pressure;
  } else if (name == "airfoil_drag") {
    c = make_preset(5, 64, 64, 5, 1, TaskMode::graph_level, Activation::linear, 500, 64, 5e-4);
  } else if (name == "airfoil_lift") {
    c = make_preset(5, 32, 32, 5, 1, TaskMode::graph_level, Activation::linear, 500, 64, 1e-3);
  } else {
    throw Error(ErrorKind::config, "unknown preset '" + name + "'");
  }
  c.preset = name;
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  const pt::ptree tree = parse_ini(text);
  check_keys(tree, {
                       {"model",
                        {"preset", "task", "latent_size", "steps", "depth", "width", "encoder_depth",
                         "encoder_width", "processor_depth", "processor_width", "graph_decoder_depth",
                         "graph_decoder_width", "node_decoder_depth", "node_decoder_width", "graph_output_size",
                         "node_output_size", "node_output_activation", "graph_output_activation",
                         "sine_frequency"}},
                       {"training",
                        {"epochs", "batch_size", "initial_lr", "l1_coefficient", "patience", "factor",
                         "min_delta", "min_lr", "seed", "checkpoint_every", "adam_beta1", "adam_beta2",
                         "adam_epsilon"}},
                       {"features", {"cell_types", "target_normalization", "velocity"}},
                   });

  RunConfig c = preset_config(tree.get<std::string>("model.preset", "airfoil_pressure"));
  GnnConfig& m = c.model;
  if (auto task = tree.get_optional<std::string>("model.task")) {
    m.task = task_mode_from_string(*task);
    // A node-level preset's pooled width means nothing for a graph-level task.
    if (m.task == TaskMode::graph_level) c.graph_output_size.reset();
  }
  read(tree, "model.latent_size", m.latent_size);
  read(tree, "model.steps", m.steps);
  if (auto d = read_optional<Index>(tree, "model.depth")) {
    m.encoder.depth = m.processor.depth = m.graph_decoder.depth = m.node_decoder.depth = *d;
  }
  if (auto w = read_optional<Index>(tree, "model.width")) {
    m.encoder.width = m.processor.width = m.graph_decoder.width = m.node_decoder.width = *w;
  }
  read(tree, "model.encoder_depth", m.encoder.depth);
  read(tree, "model.encoder_width", m.encoder.width);
  read(tree, "model.processor_depth", m.processor.depth);
  read(tree, "model.processor_width", m.processor.width);
  read(tree, "model.graph_decoder_depth", m.graph_decoder.depth);
  read(tree, "model.graph_decoder_width", m.graph_decoder.width);
  read(tree, "model.node_decoder_depth", m.node_decoder.depth);
  read(tree, "model.node_decoder_width", m.node_decoder.width);
  if (auto v = read_optional<Index>(tree, "model.graph_output_size")) c.graph_output_size = v;
  if (auto v = read_optional<Index>(tree, "model.node_output_size")) c.node_output_size = v;
  if (auto a = tree.get_optional<std::string>("model.node_output_activation")) {
    m.node_output_activation = activation_from_string(*a);
  }
  if (auto a = tree.get_optional<std::string>("model.graph_output_activation")) {
    m.graph_output_activation = activation_from_string(*a);
  }
  read(tree, "model.sine_frequency", m.sine_frequency);

  TrainConfig& t = c.training;
  read(tree, "training.epochs", t.epochs);
  read(tree, "training.batch_size", t.batch_size);
  read(tree, "training.initial_lr", t.initial_lr);
  t.min_lr = t.initial_lr / 64.0;
  read(tree, "training.min_lr", t.min_lr);
  read(tree, "training.l1_coefficient", t.l1_coefficient);
  read(tree, "training.patience", t.patience);
  read(tree, "training.factor", t.factor);
  read(tree, "training.min_delta", t.min_delta);
  read(tree, "training.seed", t.seed);
  read(tree, "training.checkpoint_every", c.checkpoint_every);
  read(tree, "training.adam_beta1", t.adam.beta1);
  read(tree, "training.adam_beta2", t.adam.beta2);
  read(tree, "training.adam_epsilon", t.adam.epsilon);
  t.validate();

  if (auto types = tree.get_optional<std::string>("features.cell_types")) {
    if (*types == "auto") {
      c.derive_cell_types = true;
    } else {
      c.features.cell_types = split_list(*types);
      if (c.features.cell_types.empty()) throw Error(ErrorKind::config, "cell_types must not be empty");
    }
  }
  if (auto s = tree.get_optional<std::string>("features.target_normalization")) {
    c.features.target_scaling = target_scaling_from_string(*s);
  }
  if (auto v = tree.get_optional<std::string>("features.velocity")) {
    if (*v == "squared_speed") c.features.velocity = VelocityDivisor::squared_speed;
    else if (*v == "speed") c.features.velocity = VelocityDivisor::speed;
    else throw Error(ErrorKind::config, "velocity must be squared_speed or speed");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return parse_run_config(read_text(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

GnnConfig resolve_model_config(const RunConfig& config, const FeaturePipeline& pipeline, Index node_target_arity,
                               Index graph_target_arity) {
  GnnConfig g = config.model;
  g.node_input_size = pipeline.node_width();
  g.edge_input_size = pipeline.edge_width();
  if (g.task == TaskMode::node_level) {
    if (node_target_arity < 1) throw Error(ErrorKind::config, "node-level training data has no node targets");
    g.node_output_size = config.node_output_size.value_or(node_target_arity);
    if (g.node_output_size != node_target_arity) {
      throw Error(ErrorKind::config, "node_output_size " + std::to_string(g.node_output_size) +
                                         " does not match the node target arity " + std::to_string(node_target_arity));
    }
    g.graph_output_size = config.graph_output_size.value_or(4);
  } else {
    if (graph_target_arity < 1) throw Error(ErrorKind::config, "graph-level training data has no graph targets");
    g.graph_output_size = graph_target_arity;
    if (config.graph_output_size && *config.graph_output_size != graph_target_arity) {
      throw Error(ErrorKind::config, "graph_output_size " + std::to_string(*config.graph_output_size) +
                                         " does not match the graph target arity " +
                                         std::to_string(graph_target_arity));
    }
  }
  g.validate();
  return g;
}

SyntheticConfig parse_synthetic_config(const std::string& text) {
  const pt::ptree tree = parse_ini(text);
  check_keys(tree, {{"synthetic",
                     {"seed", "family", "train_count", "test_count", "min_nodes", "max_nodes", "closed"}}});
  SyntheticConfig c;
  read(tree, "synthetic.seed", c.spec.seed);
  if (auto f = tree.get_optional<std::string>("synthetic.family")) c.spec.family = geometry_family_from_string(*f);
  read(tree, "synthetic.train_count", c.train_count);
  read(tree, "synthetic.test_count", c.test_count);
  read(tree, "synthetic.min_nodes", c.spec.min_nodes);
  read(tree, "synthetic.max_nodes", c.spec.max_nodes);
  if (auto s = tree.get_optional<std::string>("synthetic.closed")) c.spec.closed = parse_bool(*s, "synthetic.closed");
  if (c.train_count < 1 || c.test_count < 0) throw Error(ErrorKind::config, "train_count must be >= 1, test_count >= 0");
  c.spec.count = c.train_count + c.test_count;
  return c;
}

SyntheticConfig load_synthetic_config(const std::filesystem::path& path) {
  try {
    return parse_synthetic_config(read_text(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

} // namespace geognn
