#include "geognn/checkpoint.hpp"

#include "geognn/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace geognn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using nlohmann::json;

namespace {

class Writer {
public:
  template <typename T>
  void put(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_doubles(std::span<const double> values) {
    buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
  }
  void put_vector(const Vector& v) {
    put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    put_doubles({v.data(), static_cast<std::size_t>(v.size())});
  }
  void put_string(const std::string& s) { buf_ += s; }
  const std::string& bytes() const { return buf_; }

private:
  std::string buf_;
};

class Reader {
public:
  Reader(std::string bytes, std::string what) : buf_(std::move(bytes)), what_(std::move(what)) {}

  template <typename T>
  T get() {
    T value;
    need(sizeof(T));
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void get_doubles(std::span<double> out) {
    need(out.size_bytes());
    std::memcpy(out.data(), buf_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }
  Vector get_vector() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    Vector v(static_cast<Index>(n));
    get_doubles({v.data(), static_cast<std::size_t>(n)});
    return v;
  }
  std::string rest() {
    std::string out = buf_.substr(pos_);
    pos_ = buf_.size();
    return out;
  }
  bool done() const { return pos_ == buf_.size(); }

private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw Error(ErrorKind::parse, "truncated checkpoint section " + what_);
  }

  std::string buf_;
  std::size_t pos_ = 0;
  std::string what_;
};

json shape_json(const MlpShape& s) { return {{"depth", s.depth}, {"width", s.width}}; }
MlpShape shape_from(const json& j) { return {j.at("depth").get<Index>(), j.at("width").get<Index>()}; }

json config_json(const Checkpoint& c) {
  const GnnConfig& g = c.model.config();
  const FeaturePipeline& p = c.pipeline;
  return {
      {"model",
       {{"node_input_size", g.node_input_size},
        {"edge_input_size", g.edge_input_size},
        {"latent_size", g.latent_size},
        {"steps", g.steps},
        {"encoder", shape_json(g.encoder)},
        {"processor", shape_json(g.processor)},
        {"graph_decoder", shape_json(g.graph_decoder)},
        {"node_decoder", shape_json(g.node_decoder)},
        {"graph_output_size", g.graph_output_size},
        {"node_output_size", g.node_output_size},
        {"graph_output_activation", to_string(g.graph_output_activation)},
        {"node_output_activation", to_string(g.node_output_activation)},
        {"task", to_string(g.task)},
        {"sine_frequency", g.sine_frequency}}},
      {"features",
       {{"encoding", to_string(p.encoding)},
        {"cell_types", p.options.cell_types},
        {"target_scaling", to_string(p.options.target_scaling)},
        {"velocity", p.options.velocity == VelocityDivisor::speed ? "speed" : "squared_speed"}}},
  };
}

GnnConfig gnn_config_from(const json& j) {
  GnnConfig g;
  g.node_input_size = j.at("node_input_size").get<Index>();
  g.edge_input_size = j.at("edge_input_size").get<Index>();
  g.latent_size = j.at("latent_size").get<Index>();
  g.steps = j.at("steps").get<Index>();
  g.encoder = shape_from(j.at("encoder"));
  g.processor = shape_from(j.at("processor"));
  g.graph_decoder = shape_from(j.at("graph_decoder"));
  g.node_decoder = shape_from(j.at("node_decoder"));
  g.graph_output_size = j.at("graph_output_size").get<Index>();
  g.node_output_size = j.at("node_output_size").get<Index>();
  g.graph_output_activation = activation_from_string(j.at("graph_output_activation").get<std::string>());
  g.node_output_activation = activation_from_string(j.at("node_output_activation").get<std::string>());
  g.task = task_mode_from_string(j.at("task").get<std::string>());
  g.sine_frequency = j.at("sine_frequency").get<double>();
  return g;
}

void put_normalizer(Writer& w, const Normalizer& n) {
  w.put<std::uint8_t>(n.fitted() ? 1 : 0);
  if (!n.fitted()) return;
  w.put_vector(n.shift());
  w.put_vector(n.scale());
}

Normalizer get_normalizer(Reader& r) {
  if (r.get<std::uint8_t>() == 0) return {};
  Vector shift = r.get_vector();
  Vector scale = r.get_vector();
  return Normalizer(std::move(shift), std::move(scale));
}

void write_section(std::ostream& out, const char (&tag)[5], const std::string& payload) {
  out.write(tag, 4);
  const auto size = static_cast<std::uint64_t>(payload.size());
  out.write(reinterpret_cast<const char*>(&size), sizeof size);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

} // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& c) {
  out.write(checkpoint_magic, sizeof checkpoint_magic);
  const std::uint32_t version = checkpoint_version;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);

  write_section(out, "CONF", config_json(c).dump());

  Writer params;
  params.put<std::uint64_t>(static_cast<std::uint64_t>(c.model.parameter_count()));
  for (const auto& block : c.model.parameter_blocks()) params.put_doubles(block);
  write_section(out, "PARM", params.bytes());

  Writer norms;
  put_normalizer(norms, c.pipeline.node_normalizer);
  put_normalizer(norms, c.pipeline.edge_normalizer);
  put_normalizer(norms, c.pipeline.target_normalizer);
  write_section(out, "NORM", norms.bytes());

  if (c.train_state) {
    const TrainState& s = *c.train_state;
    Writer w;
    w.put<std::int64_t>(s.epoch);
    w.put<double>(s.adam.config.beta1);
    w.put<double>(s.adam.config.beta2);
    w.put<double>(s.adam.config.epsilon);
    w.put<std::int64_t>(s.adam.step);
    w.put<std::uint64_t>(s.adam.first_moment.size());
    for (std::size_t b = 0; b < s.adam.first_moment.size(); ++b) {
      w.put_vector(s.adam.first_moment[b]);
      w.put_vector(s.adam.second_moment[b]);
    }
    const PlateauConfig& pc = s.schedule.config();
    w.put<double>(pc.factor);
    w.put<std::int64_t>(pc.patience);
    w.put<double>(pc.min_delta);
    w.put<double>(pc.min_lr);
    w.put<double>(s.schedule.lr());
    w.put<double>(s.schedule.best());
    w.put<std::int64_t>(s.schedule.bad_epochs());
    write_section(out, "TRST", w.bytes());
  }
  if (!out) throw Error(ErrorKind::io, "checkpoint write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  save_checkpoint(out, c);
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, checkpoint_magic, sizeof magic) != 0) {
    throw Error(ErrorKind::version_mismatch, "not a geognn checkpoint: bad magic bytes (expected 'GEOGNNCK')");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (in.gcount() != sizeof version) throw Error(ErrorKind::parse, "truncated checkpoint header");
  if (version != checkpoint_version) {
    throw Error(ErrorKind::version_mismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                                 std::to_string(checkpoint_version));
  }

  std::optional<std::string> conf, parm, norm, trst;
  while (true) {
    char tag[4];
    in.read(tag, 4);
    if (in.gcount() == 0) break;
    std::uint64_t size = 0;
    if (in.gcount() != 4 || !in.read(reinterpret_cast<char*>(&size), sizeof size)) {
      throw Error(ErrorKind::parse, "truncated checkpoint section header");
    }
    std::string payload(size, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(size));
    if (static_cast<std::uint64_t>(in.gcount()) != size) {
      throw Error(ErrorKind::parse, "truncated checkpoint section " + std::string(tag, 4));
    }
    const std::string name(tag, 4);
    if (name == "CONF") conf = std::move(payload);
    else if (name == "PARM") parm = std::move(payload);
    else if (name == "NORM") norm = std::move(payload);
    else if (name == "TRST") trst = std::move(payload);
    // Unknown sections are skipped.
  }
  if (!conf || !parm || !norm) throw Error(ErrorKind::parse, "checkpoint is missing a required section");

  Checkpoint c;
  try {
    const json j = json::parse(*conf);
    c.model = GnnModel(gnn_config_from(j.at("model")));
    const json& f = j.at("features");
    c.pipeline.encoding = encoding_from_string(f.at("encoding").get<std::string>());
    c.pipeline.options.cell_types = f.at("cell_types").get<std::vector<std::string>>();
    c.pipeline.options.target_scaling = target_scaling_from_string(f.at("target_scaling").get<std::string>());
    c.pipeline.options.velocity =
        f.at("velocity").get<std::string>() == "speed" ? VelocityDivisor::speed : VelocityDivisor::squared_speed;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("bad checkpoint config: ") + e.what());
  }

  Reader params(std::move(*parm), "PARM");
  const auto count = params.get<std::uint64_t>();
  if (count != static_cast<std::uint64_t>(c.model.parameter_count())) {
    throw Error(ErrorKind::parse, "checkpoint holds " + std::to_string(count) + " parameters, config implies " +
                                      std::to_string(c.model.parameter_count()));
  }
  for (auto block : c.model.parameter_blocks()) params.get_doubles(block);

  Reader norms(std::move(*norm), "NORM");
  c.pipeline.node_normalizer = get_normalizer(norms);
  c.pipeline.edge_normalizer = get_normalizer(norms);
  c.pipeline.target_normalizer = get_normalizer(norms);

  if (trst) {
    Reader r(std::move(*trst), "TRST");
    TrainState s;
    s.epoch = r.get<std::int64_t>();
    s.adam.config.beta1 = r.get<double>();
    s.adam.config.beta2 = r.get<double>();
    s.adam.config.epsilon = r.get<double>();
    s.adam.step = r.get<std::int64_t>();
    const auto blocks = r.get<std::uint64_t>();
    for (std::uint64_t b = 0; b < blocks; ++b) {
      s.adam.first_moment.push_back(r.get_vector());
      s.adam.second_moment.push_back(r.get_vector());
    }
    PlateauConfig pc;
    pc.factor = r.get<double>();
    pc.patience = r.get<std::int64_t>();
    pc.min_delta = r.get<double>();
    pc.min_lr = r.get<double>();
    const double lr = r.get<double>();
    const double best = r.get<double>();
    const auto bad = r.get<std::int64_t>();
    s.schedule = PlateauSchedule(pc, lr);
    if (s.epoch > 0) s.schedule.restore(lr, best, bad);
    c.train_state = std::move(s);
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return load_checkpoint(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

} // namespace geognn
