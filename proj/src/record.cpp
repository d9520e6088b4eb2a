#include "geognn/record.hpp"

#include "geognn/error.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace geognn {

using nlohmann::json;

Graph GraphRecord::build_topology() const {
  if (topology == TopologyKind::chain) return build_surface_chain(positions, closed);
  return build_from_mesh(positions, cells);
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

} // namespace

bool identical(const GraphRecord& a, const GraphRecord& b) {
  auto same_opt = [](const auto& x, const auto& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->rows() == y->rows() && x->cols() == y->cols() && (x->size() == 0 || *x == *y);
  };
  return a.id == b.id && same(a.positions, b.positions) && a.topology == b.topology && a.cells == b.cells &&
         a.cell_types == b.cell_types && a.closed == b.closed && a.upper == b.upper &&
         a.freestream == b.freestream && same_opt(a.node_targets, b.node_targets) &&
         same_opt(a.graph_targets, b.graph_targets);
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorKind::parse, std::string("'") + field + "' must be an array of rows");
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows > 0 ? static_cast<Index>(j.front().size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorKind::parse, std::string("'") + field + "' rows must all have " + std::to_string(cols) +
                                        " entries (row " + std::to_string(i) + ")");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

} // namespace

std::string record_to_json_line(const GraphRecord& r) {
  json j;
  j["id"] = r.id;
  j["dim"] = r.positions.cols();
  j["positions"] = matrix_to_json(r.positions);
  if (r.topology == TopologyKind::chain) {
    j["topology"] = "chain";
    j["closed"] = r.closed;
    j["upper"] = r.upper;
  } else {
    j["topology"] = "mesh";
    j["cells"] = r.cells;
    j["cell_types"] = r.cell_types;
  }
  if (r.freestream) j["freestream"] = *r.freestream;
  if (r.node_targets) j["node_targets"] = matrix_to_json(*r.node_targets);
  if (r.graph_targets) j["graph_targets"] = std::vector<double>(r.graph_targets->begin(), r.graph_targets->end());
  return j.dump();
}

GraphRecord record_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed record: ") + e.what());
  }
  try {
    GraphRecord r;
    r.id = j.at("id").get<std::string>();
    r.positions = matrix_from_json(j.at("positions"), "positions");
    const auto dim = j.at("dim").get<Index>();
    if (r.positions.rows() > 0 && r.positions.cols() != dim) {
      throw Error(ErrorKind::parse, "record '" + r.id + "': positions are not " + std::to_string(dim) + "-D");
    }
    if (r.positions.rows() == 0) r.positions.resize(0, dim);
    const auto topology = j.at("topology").get<std::string>();
    if (topology == "chain") {
      r.topology = TopologyKind::chain;
      r.closed = j.at("closed").get<bool>();
      r.upper = j.at("upper").get<std::vector<bool>>();
    } else if (topology == "mesh") {
      r.topology = TopologyKind::mesh;
      r.cells = j.at("cells").get<std::vector<std::vector<Index>>>();
      r.cell_types = j.at("cell_types").get<std::vector<std::vector<std::string>>>();
    } else {
      throw Error(ErrorKind::parse, "record '" + r.id + "': unknown topology '" + topology + "'");
    }
    if (j.contains("freestream")) r.freestream = j["freestream"].get<std::array<double, 2>>();
    if (j.contains("node_targets")) r.node_targets = matrix_from_json(j["node_targets"], "node_targets");
    if (j.contains("graph_targets")) {
      const auto v = j["graph_targets"].get<std::vector<double>>();
      r.graph_targets = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("bad record field: ") + e.what());
  }
}

void write_dataset(std::ostream& out, const std::vector<GraphRecord>& records) {
  json header{{"format", dataset_format_name}, {"version", dataset_format_version}};
  out << header.dump() << '\n';
  for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

void write_dataset(const std::filesystem::path& path, const std::vector<GraphRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_dataset(out, records);
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::vector<GraphRecord> read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, source + ": empty dataset file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error&) {
    throw Error(ErrorKind::parse, source + ":1: missing dataset header");
  }
  if (!header.is_object() || header.value("format", "") != dataset_format_name) {
    throw Error(ErrorKind::parse, source + ":1: not a " + std::string(dataset_format_name) + " file");
  }
  const int version = header.value("version", -1);
  if (version != dataset_format_version) {
    throw Error(ErrorKind::version_mismatch, source + ": dataset version " + std::to_string(version) +
                                                 ", expected " + std::to_string(dataset_format_version));
  }
  std::vector<GraphRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json_line(line));
    } catch (const Error& e) {
      throw Error(e.kind(), source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<GraphRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return read_dataset(in, path.string());
}

} // namespace geognn
