#pragma once

#include "geognn/featurize.hpp"
#include "geognn/record.hpp"
#include "geognn/sample.hpp"

#include <span>
#include <string>
#include <vector>

namespace geognn {

enum class Encoding { feature_design, airfoil };

/// How node targets are brought to training scale. Graph targets are never
/// rescaled.
enum class TargetScaling {
  none,
  zscore,    // dataset mean / std per column
  scale,     // dataset std per column, no shift (keeps the sign)
  pressure,  // per graph: p / vel, then subtract the graph mean
};

const char* to_string(Encoding e);
Encoding encoding_from_string(const std::string& name);
const char* to_string(TargetScaling s);
TargetScaling target_scaling_from_string(const std::string& name);

struct FeatureOptions {
  std::vector<std::string> cell_types = default_cell_types();
  TargetScaling target_scaling = TargetScaling::zscore;
  VelocityDivisor velocity = VelocityDivisor::squared_speed;
};

/// Raw (unnormalized) features and targets of one record.
Graph raw_features(const GraphRecord& record, Encoding encoding, const std::vector<std::string>& cell_types);

/// Encoding implied by the records' topology; mixed datasets are rejected.
Encoding detect_encoding(std::span<const GraphRecord> records);

/// Fitted featurization: encoding choice plus normalizers fitted on the
/// training split. Stored in checkpoints so raw records can be featurized
/// identically at inference time.
struct FeaturePipeline {
  Encoding encoding = Encoding::airfoil;
  FeatureOptions options;
  Normalizer node_normalizer;
  Normalizer edge_normalizer;
  Normalizer target_normalizer;  // zscore / scale modes only

  static FeaturePipeline fit(std::span<const GraphRecord> training, const FeatureOptions& options);

  Index node_width() const;
  Index edge_width() const;

  Sample featurize(const GraphRecord& record) const;
  std::vector<Sample> featurize(std::span<const GraphRecord> records) const;
};

} // namespace geognn
