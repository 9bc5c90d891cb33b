#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "onebm/collector.hpp"
#include "onebm/database.hpp"
#include "onebm/path_enum.hpp"
#include "onebm/selection.hpp"
#include "onebm/transforms.hpp"

namespace onebm {

struct PipelineConfig {
  std::string schema_path;
  std::string data_dir;
  std::string output_path;
  int max_depth = 2;
  TraversalMode mode = TraversalMode::forward_only;
  SamplingPolicy policy;
  TransformConfig transform_cfg;
  SelectionConfig selection_cfg;
  bool emit_report = false;
  bool explain_only = false;
};

struct PipelineResult {
  size_t rows = 0;
  size_t features = 0;  // selected feature columns written
  std::vector<std::string> warnings;
};

// Concatenates feature vectors in the given (plan) order, each vector's
// columns sorted by name. Throws NameCollision on a repeated feature name.
FeatureMatrix assemble_matrix(const std::vector<FeatureVector>& vectors, size_t entity_count);

// The hop-less pseudo paths for the main table's own columns (every column
// except the target and the cutoff column), in declaration order.
std::vector<CollectedColumn> main_scalar_columns(const Database& db);

// Report path derived from the output path: "<stem>.report.csv".
std::string report_path_for(const std::string& output_path);

// load -> enumerate -> collect -> transform -> assemble -> select -> write.
// `log` receives warnings, per-path diagnostics, and --explain output.
PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream& log);

}  // namespace onebm
