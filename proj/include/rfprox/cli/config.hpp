#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rfprox/data/synthetic.hpp"
#include "rfprox/forest/params.hpp"
#include "rfprox/mds.hpp"
#include "rfprox/modelsel.hpp"
#include "rfprox/outlier.hpp"
#include "rfprox/proximity.hpp"

namespace rfprox::cli {

// Environment variable naming the directory relative output paths resolve against.
inline constexpr const char* kOutputRootEnv = "RFPROX_OUTPUT_ROOT";

struct DatasetConfig {
  std::string path;
  std::string label = "label";
  std::vector<std::string> categorical;
  // Optional fixed category order per column; otherwise sorted distinct values.
  std::map<std::string, std::vector<std::string>> vocabularies;
};

struct GridConfig {
  bool enabled = false;
  Grid grid = Grid::table3();
  std::size_t budget = 0;  // 0 = every config
  int k = 5;
  Scoring scoring = Scoring::accuracy;
};

// Which records the proximity matrix covers: both splits, or one of them.
enum class Scope { all, train, test };
std::string to_string(Scope s);
Scope parse_scope(const std::string& text);

struct RunConfig {
  std::optional<DatasetConfig> dataset;
  std::optional<SyntheticSpec> synthetic;
  std::string output_dir = "rfprox-run";
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  ForestParams forest;
  GridConfig grid;
  ProximityKind proximity_kind = ProximityKind::original;
  Scope scope = Scope::all;
  double proximity_csv_cutoff = -1.0;  // negative: no CSV export
  OutlierOptions outlier;
  MdsOptions mds;
  std::vector<std::string> mds_classes;  // empty = every class
  std::string returns_path;     // default <output>/synthetic/returns.csv
  std::string benchmarks_path;  // default <output>/synthetic/benchmarks.csv
  unsigned threads = 0;         // never echoed: results do not depend on it

  void validate() const;  // throws InvalidParams
  std::filesystem::path output_path() const;
};

// Unknown keys are rejected so typos surface as usage errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const ForestParams& p);
nlohmann::json to_json(const SyntheticSpec& s);

}  // namespace rfprox::cli
