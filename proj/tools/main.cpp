#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "onebm/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Automated feature engineering over relational CSV tables"};

  onebm::PipelineConfig cfg;
  std::string mode = "forward-only";
  std::string transform_config;

  app.add_option("--schema", cfg.schema_path, "Schema description (JSON)")
      ->required();
  app.add_option("--data", cfg.data_dir, "Directory holding the CSV tables")
      ->required();
  app.add_option("--out", cfg.output_path, "Feature matrix output path (CSV)")
      ->required();
  app.add_option("--max-depth", cfg.max_depth, "Maximum joining-path length in hops")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();
  app.add_option("--mode", mode, "Path traversal mode: forward-only or full")
      ->check(CLI::IsMember({"forward-only", "forward_only", "full"}))
      ->capture_default_str();
  app.add_option("--max-joined-size", cfg.policy.max_joined_size,
                 "Joined-size cap that triggers subsampling")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", cfg.policy.seed, "Subsampling seed")->capture_default_str();
  app.add_option("--transform-config", transform_config,
                 "Transformation parameters (JSON), overriding the defaults");
  app.add_flag("--report", cfg.emit_report,
               "Also write a per-feature selection report next to the matrix");
  app.add_flag("--explain", cfg.explain_only,
               "Print the joining-path plan and collection statistics; write no matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.mode = onebm::traversal_mode_from_string(mode);
    if (!transform_config.empty())
      cfg.transform_cfg = onebm::load_transform_config(transform_config);
    onebm::PipelineResult result = onebm::run_pipeline(cfg, cfg.explain_only ? std::cout : std::cerr);
    if (!cfg.explain_only)
      std::cerr << "wrote " << result.rows << " rows x " << result.features << " features to "
                << cfg.output_path << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
