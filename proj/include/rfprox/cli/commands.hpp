#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfprox/cli/config.hpp"
#include "rfprox/data/dataset.hpp"

namespace rfprox::cli {

struct CommandResult {
  std::vector<std::string> outputs;  // file names written, relative to the output directory
  nlohmann::json summary;
};

// The configured dataset (CSV or synthetic), zero-imputed.
Dataset load_run_dataset(const RunConfig& config);

// Default locations inside the output directory.
std::filesystem::path default_model_path(const RunConfig& config);
std::filesystem::path default_scores_path(const RunConfig& config);

// 80/20 split (or test_fraction), optional grid search on the training part,
// final fit, test metrics. Writes model.bin, metrics.json, predictions.csv,
// cv_table.csv (with a grid) and, for synthetic configs, synthetic/*.csv.
CommandResult cmd_train(const RunConfig& config);

// Predictions and the proximity matrix for the configured scope.
CommandResult cmd_score(const RunConfig& config, const std::filesystem::path& model);

// scores.csv, novelty.csv, outliers.json, outliers.svg and novelty.svg.
CommandResult cmd_outliers(const RunConfig& config, const std::filesystem::path& model);

// mds.csv, mds.json and mds.svg for the configured class subset.
CommandResult cmd_mds(const RunConfig& config, const std::filesystem::path& model);

// Per class and quartile R^2 of returns against the class benchmark:
// analysis.json, r2.csv and analysis.svg.
CommandResult cmd_analyze(const RunConfig& config, const std::filesystem::path& scores,
                          const std::filesystem::path& returns, const std::filesystem::path& benchmarks);

// Consolidates the artifacts of a run directory into report.json.
CommandResult cmd_report(const RunConfig& config, const std::filesystem::path& run_dir);

// Writes the synthetic panel (dataset, returns, benchmarks, truth) under synthetic/.
CommandResult cmd_synth(const RunConfig& config);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace rfprox::cli
