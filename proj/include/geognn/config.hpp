#pragma once

#include "geognn/gnn.hpp"
#include "geognn/pipeline.hpp"
#include "geognn/synthetic.hpp"
#include "geognn/trainer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace geognn {

/// Model, training and featurization settings for `train`.
///
/// Files are INI-style (`[model]`, `[training]`, `[features]` sections of
/// `key = value`). `[model] preset` selects one of the task presets below as
/// the base; every other key overrides it.
///
/// | preset           | n_d | n_w | n_l | L | delta^G out | head   | epochs | batch | lr   |
/// |------------------|-----|-----|-----|---|-------------|--------|--------|-------|------|
/// | residual_stress  | 4   | 64  | 64  | 6 | 4           | relu   | 2000   | 16    | 5e-4 |
/// | airfoil_pressure | 5   | 64  | 64  | 5 | 4           | linear | 3000   | 32    | 5e-4 |
/// | airfoil_drag     | 5   | 64  | 64  | 5 | 1 (graph)   | linear | 500    | 64    | 5e-4 |
/// | airfoil_lift     | 5   | 32  | 32  | 5 | 1 (graph)   | linear | 500    | 64    | 1e-3 |
struct RunConfig {
  std::string preset = "airfoil_pressure";
  GnnConfig model;  // input sizes are filled in from the data
  std::optional<Index> graph_output_size;  // default: 4 node-level, target arity graph-level
  std::optional<Index> node_output_size;   // default: node target arity
  TrainConfig training;
  FeatureOptions features;
  bool derive_cell_types = false;  // `cell_types = auto`
  std::int64_t checkpoint_every = 0;
};

RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Model config with input/output sizes resolved against a fitted pipeline
/// and the training data.
GnnConfig resolve_model_config(const RunConfig& config, const FeaturePipeline& pipeline, Index node_target_arity,
                               Index graph_target_arity);

/// `[synthetic]` section for `gen`.
struct SyntheticConfig {
  SyntheticSpec spec;
  Index train_count = 300;
  Index test_count = 50;
};

SyntheticConfig parse_synthetic_config(const std::string& text);
SyntheticConfig load_synthetic_config(const std::filesystem::path& path);

} // namespace geognn
