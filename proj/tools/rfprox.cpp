// rfprox: train a forest, score proximities and outliers, embed, analyze.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rfprox/cli/commands.hpp"
#include "rfprox/cli/config.hpp"
#include "rfprox/errors.hpp"

namespace {

using namespace rfprox;
using namespace rfprox::cli;

struct Overrides {
  std::string config;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> data;
  std::optional<std::string> label;
  std::optional<std::string> kind;
  std::optional<std::string> scope;
  std::optional<std::string> k_sigma;
  std::optional<std::string> anchor;
  std::optional<std::string> deviation;
  std::optional<int> n_trees;
  std::optional<std::string> method;
  std::vector<std::string> classes;
  bool grid = false;
  std::optional<std::size_t> grid_budget;
  std::string model;
  std::string scores;
  std::string returns;
  std::string benchmarks;
  std::string run_dir;
};

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.output) c.output_dir = *o.output;
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.data) {
    if (!c.dataset) c.dataset = DatasetConfig{};
    c.dataset->path = *o.data;
    c.synthetic.reset();
  }
  if (o.label) {
    if (!c.dataset) throw InvalidParams("--label needs a dataset");
    c.dataset->label = *o.label;
  }
  if (o.kind) c.proximity_kind = parse_proximity_kind(*o.kind);
  if (o.scope) c.scope = parse_scope(*o.scope);
  if (o.k_sigma) {
    nlohmann::json v = *o.k_sigma;
    if (*o.k_sigma != "inf") {
      try {
        std::size_t used = 0;
        v = std::stod(*o.k_sigma, &used);
        if (used != o.k_sigma->size()) throw InvalidParams("bad --k-sigma '" + *o.k_sigma + "'");
      } catch (const std::logic_error&) {
        throw InvalidParams("bad --k-sigma '" + *o.k_sigma + "'");
      }
    }
    c.outlier.k_sigma = v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
  }
  if (o.anchor) c.outlier.anchor = parse_threshold_anchor(*o.anchor);
  if (o.deviation) c.outlier.deviation = parse_deviation_kind(*o.deviation);
  if (o.n_trees) c.forest.n_trees = *o.n_trees;
  if (o.method) c.mds.method = parse_mds_method(*o.method);
  if (!o.classes.empty()) c.mds_classes = o.classes;
  if (o.grid) c.grid.enabled = true;
  if (o.grid_budget) c.grid.budget = *o.grid_budget;
  c.validate();
  return c;
}

void print(const CommandResult& r, const std::string& command) {
  std::cout << command << ": " << r.summary.dump() << '\n';
  for (const auto& f : r.outputs) std::cout << "  wrote " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-forest proximities, outlier scores and embeddings"};
  app.set_version_flag("--version", std::string(RFPROX_VERSION));
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub, bool dataset) {
    sub->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("-o,--output", o.output, "output directory");
    sub->add_option("--seed", o.seed, "run seed");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    if (dataset) {
      sub->add_option("--data", o.data, "dataset CSV");
      sub->add_option("--label", o.label, "label column");
    }
  };
  auto scoring = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "model file (default <output>/model.bin)");
    sub->add_option("--kind", o.kind, "proximity: original, oob or gap");
    sub->add_option("--scope", o.scope, "records scored: all, train or test");
  };
  auto outlier = [&](CLI::App* sub) {
    sub->add_option("--k-sigma", o.k_sigma, "threshold multiplier, or inf");
    sub->add_option("--anchor", o.anchor, "threshold anchor: mean or zero");
    sub->add_option("--deviation", o.deviation, "spread: mad or mean_absolute");
  };

  auto* train = app.add_subcommand("train", "fit the forest and report test metrics");
  common(train, true);
  train->add_option("--n-trees", o.n_trees, "trees when no grid search runs");
  train->add_flag("--grid", o.grid, "tune with k-fold grid search");
  train->add_option("--grid-budget", o.grid_budget, "evaluate at most this many grid configs");

  auto* score = app.add_subcommand("score", "predictions and the proximity matrix");
  common(score, true);
  scoring(score);

  auto* outliers = app.add_subcommand("outliers", "outlier measures, flags, quartiles and novelty");
  common(outliers, true);
  scoring(outliers);
  outlier(outliers);

  auto* mds = app.add_subcommand("mds", "2-D embedding of 1 - proximity");
  common(mds, true);
  scoring(mds);
  outlier(mds);
  mds->add_option("--method", o.method, "classical or smacof");
  mds->add_option("--classes", o.classes, "class names to embed (default all)");

  auto* analyze = app.add_subcommand("analyze", "R^2 against class benchmarks by outlier quartile");
  common(analyze, false);
  analyze->add_option("--scores", o.scores, "scores.csv (default <output>/scores.csv)");
  analyze->add_option("--returns", o.returns, "returns CSV: record_id,period,return");
  analyze->add_option("--benchmarks", o.benchmarks, "benchmarks CSV: label,period,return");

  auto* report = app.add_subcommand("report", "collect a run directory into report.json");
  common(report, false);
  report->add_option("--run-dir", o.run_dir, "run directory (default the output directory)");

  auto* synth = app.add_subcommand("synth", "write the synthetic fund panel");
  common(synth, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig c = build_config(o);
    auto model = [&] { return o.model.empty() ? default_model_path(c) : std::filesystem::path(o.model); };
    if (train->parsed()) {
      print(cmd_train(c), "train");
    } else if (score->parsed()) {
      print(cmd_score(c, model()), "score");
    } else if (outliers->parsed()) {
      print(cmd_outliers(c, model()), "outliers");
    } else if (mds->parsed()) {
      print(cmd_mds(c, model()), "mds");
    } else if (analyze->parsed()) {
      const std::filesystem::path out = c.output_path();
      const std::filesystem::path scores = o.scores.empty() ? default_scores_path(c) : std::filesystem::path(o.scores);
      std::filesystem::path returns = o.returns.empty() ? c.returns_path : o.returns;
      std::filesystem::path benchmarks = o.benchmarks.empty() ? c.benchmarks_path : o.benchmarks;
      if (returns.empty()) returns = out / "synthetic" / "returns.csv";
      if (benchmarks.empty()) benchmarks = out / "synthetic" / "benchmarks.csv";
      print(cmd_analyze(c, scores, returns, benchmarks), "analyze");
    } else if (report->parsed()) {
      print(cmd_report(c, o.run_dir.empty() ? c.output_path() : std::filesystem::path(o.run_dir)), "report");
    } else if (synth->parsed()) {
      print(cmd_synth(c), "synth");
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
