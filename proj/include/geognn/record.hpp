#pragma once

#include "geognn/graph.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace geognn {

inline constexpr const char* dataset_format_name = "geognn-graphs";
inline constexpr int dataset_format_version = 1;

enum class TopologyKind { mesh, chain };

/// On-disk description of one sample: geometry, topology source, per-node
/// labels and optional targets.
struct GraphRecord {
  std::string id;
  Matrix positions;  // N x D
  TopologyKind topology = TopologyKind::mesh;
  std::vector<std::vector<Index>> cells;             // mesh
  std::vector<std::vector<std::string>> cell_types;  // mesh, per node
  bool closed = false;                               // chain
  std::vector<bool> upper;                           // chain, per node
  std::optional<std::array<double, 2>> freestream;   // (u_0, v_0)
  std::optional<Matrix> node_targets;                // N x d_y
  std::optional<Vector> graph_targets;               // e.g. (C_D, C_L)

  Index num_nodes() const { return positions.rows(); }

  /// Topology only; features and targets are left empty.
  Graph build_topology() const;
};

/// Exact equality of every field, positions and targets bit-for-bit.
bool identical(const GraphRecord& a, const GraphRecord& b);

/// Line-delimited JSON: a header line naming the format and version, then
/// one record per line. Doubles are written with round-trip precision.
void write_dataset(std::ostream& out, const std::vector<GraphRecord>& records);
void write_dataset(const std::filesystem::path& path, const std::vector<GraphRecord>& records);

std::vector<GraphRecord> read_dataset(std::istream& in, const std::string& source = "<stream>");
std::vector<GraphRecord> read_dataset(const std::filesystem::path& path);

std::string record_to_json_line(const GraphRecord& record);
GraphRecord record_from_json_line(const std::string& line);

} // namespace geognn
