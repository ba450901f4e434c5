#include "rfprox/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>

#include "rfprox/errors.hpp"

namespace rfprox::cli {

using nlohmann::json;

std::string to_string(Scope s) {
  switch (s) {
    case Scope::all: return "all";
    case Scope::train: return "train";
    case Scope::test: return "test";
  }
  return "all";
}

Scope parse_scope(const std::string& text) {
  if (text == "all") return Scope::all;
  if (text == "train") return Scope::train;
  if (text == "test") return Scope::test;
  throw InvalidParams("unknown proximity scope '" + text + "'");
}

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidParams("'" + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw InvalidParams("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidParams(std::string("bad value for '") + key + "'");
  }
}

// Real number that may be spelled "inf".
double read_real(const json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  throw InvalidParams(std::string("bad value for '") + key + "'");
}

json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

std::optional<int> read_depth(const json& v) {
  if (v.is_null() || (v.is_string() && (v == "none" || v == "unbounded"))) return std::nullopt;
  if (v.is_number_integer()) return v.get<int>();
  throw InvalidParams("max_depth must be an integer or null");
}

json depth_json(const std::optional<int>& d) { return d ? json(*d) : json(nullptr); }

ForestParams parse_forest(const json& j, ForestParams p) {
  reject_unknown(j, "forest",
                 {"n_trees", "max_depth", "max_features", "criterion", "min_samples_leaf", "class_weights"});
  read(j, "n_trees", p.n_trees);
  if (j.contains("max_depth")) p.max_depth = read_depth(j["max_depth"]);
  if (j.contains("max_features")) p.max_features = parse_max_features(j["max_features"].get<std::string>());
  if (j.contains("criterion")) p.criterion = parse_criterion(j["criterion"].get<std::string>());
  read(j, "min_samples_leaf", p.min_samples_leaf);
  if (j.contains("class_weights")) {
    const auto& w = j["class_weights"];
    if (w.is_string() && w == "balanced") p.class_weights.clear();
    else if (w.is_array()) p.class_weights = w.get<std::vector<double>>();
    else throw InvalidParams("class_weights must be \"balanced\" or a list of numbers");
  }
  return p;
}

SyntheticSpec parse_synthetic(const json& j) {
  reject_unknown(j, "synthetic",
                 {"n_classes", "records_per_class", "numeric_dims", "categorical_vocab_sizes", "class_separation",
                  "within_spread", "contamination_fraction", "category_fidelity", "beta_min", "beta_max",
                  "noise_base", "noise_growth", "benchmark_mean", "benchmark_vol", "horizon", "seed"});
  SyntheticSpec s;
  read(j, "n_classes", s.n_classes);
  read(j, "records_per_class", s.records_per_class);
  read(j, "numeric_dims", s.numeric_dims);
  read(j, "categorical_vocab_sizes", s.categorical_vocab_sizes);
  read(j, "class_separation", s.class_separation);
  read(j, "within_spread", s.within_spread);
  read(j, "contamination_fraction", s.contamination_fraction);
  read(j, "category_fidelity", s.category_fidelity);
  read(j, "beta_min", s.beta_min);
  read(j, "beta_max", s.beta_max);
  read(j, "noise_base", s.noise_base);
  read(j, "noise_growth", s.noise_growth);
  read(j, "benchmark_mean", s.benchmark_mean);
  read(j, "benchmark_vol", s.benchmark_vol);
  read(j, "horizon", s.horizon);
  read(j, "seed", s.seed);
  s.validate();
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (dataset && synthetic) throw InvalidParams("give either 'dataset' or 'synthetic', not both");
  if (dataset && dataset->path.empty()) throw InvalidParams("dataset.path is empty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidParams("test_fraction must lie in (0, 1)");
  forest.validate();
  if (grid.enabled) {
    grid.grid.validate();
    if (grid.k < 2) throw InvalidParams("grid.k must be at least 2");
  }
  if (std::isnan(outlier.k_sigma)) throw InvalidParams("k_sigma must be a number");
  if (mds.max_iter < 0 || !(mds.tol >= 0.0)) throw InvalidParams("mds.max_iter and mds.tol must be nonnegative");
  if (output_dir.empty()) throw InvalidParams("output_dir is empty");
}

std::filesystem::path RunConfig::output_path() const {
  std::filesystem::path p(output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') return std::filesystem::path(root) / p;
  }
  return p;
}

RunConfig parse_config(const json& j) {
  reject_unknown(j, "config",
                 {"dataset", "synthetic", "output_dir", "seed", "test_fraction", "forest", "grid", "proximity",
                  "outlier", "mds", "analysis", "threads"});
  RunConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      reject_unknown(d, "dataset", {"path", "label", "categorical", "vocabularies"});
      DatasetConfig dc;
      read(d, "path", dc.path);
      read(d, "label", dc.label);
      read(d, "categorical", dc.categorical);
      read(d, "vocabularies", dc.vocabularies);
      c.dataset = std::move(dc);
    }
    if (j.contains("synthetic")) c.synthetic = parse_synthetic(j["synthetic"]);
    read(j, "output_dir", c.output_dir);
    read(j, "seed", c.seed);
    read(j, "test_fraction", c.test_fraction);
    read(j, "threads", c.threads);
    if (j.contains("forest")) c.forest = parse_forest(j["forest"], c.forest);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown(g, "grid", {"enabled", "n_trees", "max_depth", "max_features", "criterion", "budget", "k", "scoring"});
      read(g, "enabled", c.grid.enabled);
      read(g, "n_trees", c.grid.grid.n_trees);
      if (g.contains("max_depth")) {
        c.grid.grid.max_depth.clear();
        for (const auto& v : g["max_depth"]) c.grid.grid.max_depth.push_back(read_depth(v));
      }
      if (g.contains("max_features")) {
        c.grid.grid.max_features.clear();
        for (const auto& v : g["max_features"]) c.grid.grid.max_features.push_back(parse_max_features(v.get<std::string>()));
      }
      if (g.contains("criterion")) {
        c.grid.grid.criterion.clear();
        for (const auto& v : g["criterion"]) c.grid.grid.criterion.push_back(parse_criterion(v.get<std::string>()));
      }
      read(g, "budget", c.grid.budget);
      read(g, "k", c.grid.k);
      if (g.contains("scoring")) c.grid.scoring = parse_scoring(g["scoring"].get<std::string>());
    }
    if (j.contains("proximity")) {
      const auto& p = j["proximity"];
      reject_unknown(p, "proximity", {"kind", "scope", "csv_cutoff"});
      if (p.contains("kind")) c.proximity_kind = parse_proximity_kind(p["kind"].get<std::string>());
      if (p.contains("scope")) c.scope = parse_scope(p["scope"].get<std::string>());
      read(p, "csv_cutoff", c.proximity_csv_cutoff);
    }
    if (j.contains("outlier")) {
      const auto& o = j["outlier"];
      reject_unknown(o, "outlier", {"k_sigma", "deviation", "anchor"});
      if (o.contains("k_sigma")) c.outlier.k_sigma = read_real(o["k_sigma"], "k_sigma");
      if (o.contains("deviation")) c.outlier.deviation = parse_deviation_kind(o["deviation"].get<std::string>());
      if (o.contains("anchor")) c.outlier.anchor = parse_threshold_anchor(o["anchor"].get<std::string>());
    }
    if (j.contains("mds")) {
      const auto& m = j["mds"];
      reject_unknown(m, "mds", {"method", "max_iter", "tol", "classes"});
      if (m.contains("method")) c.mds.method = parse_mds_method(m["method"].get<std::string>());
      read(m, "max_iter", c.mds.max_iter);
      read(m, "tol", c.mds.tol);
      read(m, "classes", c.mds_classes);
    }
    if (j.contains("analysis")) {
      const auto& a = j["analysis"];
      reject_unknown(a, "analysis", {"returns", "benchmarks"});
      read(a, "returns", c.returns_path);
      read(a, "benchmarks", c.benchmarks_path);
    }
  } catch (const json::exception& e) {
    throw InvalidParams(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidParams("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ForestParams& p) {
  json j;
  j["n_trees"] = p.n_trees;
  j["max_depth"] = depth_json(p.max_depth);
  j["max_features"] = to_string(p.max_features);
  j["criterion"] = to_string(p.criterion);
  j["min_samples_leaf"] = p.min_samples_leaf;
  j["class_weights"] = p.class_weights.empty() ? json("balanced") : json(p.class_weights);
  return j;
}

json to_json(const SyntheticSpec& s) {
  return json{{"n_classes", s.n_classes},
              {"records_per_class", s.records_per_class},
              {"numeric_dims", s.numeric_dims},
              {"categorical_vocab_sizes", s.categorical_vocab_sizes},
              {"class_separation", s.class_separation},
              {"within_spread", s.within_spread},
              {"contamination_fraction", s.contamination_fraction},
              {"category_fidelity", s.category_fidelity},
              {"beta_min", s.beta_min},
              {"beta_max", s.beta_max},
              {"noise_base", s.noise_base},
              {"noise_growth", s.noise_growth},
              {"benchmark_mean", s.benchmark_mean},
              {"benchmark_vol", s.benchmark_vol},
              {"horizon", s.horizon},
              {"seed", s.seed}};
}

json to_json(const RunConfig& c) {
  json j;
  if (c.dataset) {
    j["dataset"] = {{"path", c.dataset->path},
                    {"label", c.dataset->label},
                    {"categorical", c.dataset->categorical},
                    {"vocabularies", c.dataset->vocabularies}};
  }
  if (c.synthetic) j["synthetic"] = to_json(*c.synthetic);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["test_fraction"] = c.test_fraction;
  j["forest"] = to_json(c.forest);
  json depths = json::array();
  for (const auto& d : c.grid.grid.max_depth) depths.push_back(depth_json(d));
  json features = json::array();
  for (auto m : c.grid.grid.max_features) features.push_back(to_string(m));
  json criteria = json::array();
  for (auto cr : c.grid.grid.criterion) criteria.push_back(to_string(cr));
  j["grid"] = {{"enabled", c.grid.enabled},  {"n_trees", c.grid.grid.n_trees}, {"max_depth", depths},
               {"max_features", features},   {"criterion", criteria},         {"budget", c.grid.budget},
               {"k", c.grid.k},              {"scoring", to_string(c.grid.scoring)}};
  j["proximity"] = {{"kind", to_string(c.proximity_kind)},
                    {"scope", to_string(c.scope)},
                    {"csv_cutoff", c.proximity_csv_cutoff}};
  j["outlier"] = {{"k_sigma", real_json(c.outlier.k_sigma)},
                  {"deviation", to_string(c.outlier.deviation)},
                  {"anchor", to_string(c.outlier.anchor)}};
  j["mds"] = {{"method", to_string(c.mds.method)},
              {"max_iter", c.mds.max_iter},
              {"tol", c.mds.tol},
              {"classes", c.mds_classes}};
  j["analysis"] = {{"returns", c.returns_path}, {"benchmarks", c.benchmarks_path}};
  return j;
}

}  // namespace rfprox::cli
