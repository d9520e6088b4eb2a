#pragma once

#include "geognn/gnn.hpp"
#include "geognn/pipeline.hpp"
#include "geognn/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace geognn {

inline constexpr char checkpoint_magic[8] = {'G', 'E', 'O', 'G', 'N', 'N', 'C', 'K'};
inline constexpr std::uint32_t checkpoint_version = 1;

struct Checkpoint {
  GnnModel model;
  FeaturePipeline pipeline;
  std::optional<TrainState> train_state;
};

/// Binary container: magic, version, then tagged length-prefixed sections
/// (CONF json, PARM raw doubles, NORM normalizers, TRST optional resume
/// state). Parameters are stored bit-exactly.
void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace geognn
