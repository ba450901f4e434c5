#include "rfprox/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "rfprox/cli/svg.hpp"
#include "rfprox/data/csv.hpp"
#include "rfprox/data/split.hpp"
#include "rfprox/data/synthetic.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/forest/serialize.hpp"
#include "rfprox/mds.hpp"
#include "rfprox/metrics.hpp"
#include "rfprox/modelsel.hpp"
#include "rfprox/outlier.hpp"
#include "rfprox/proximity.hpp"

namespace rfprox::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// JSON has no infinities; spell them out.
json num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json(nullptr);
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

fs::path prepare_output(const RunConfig& config) {
  const fs::path dir = config.output_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config, const json& inputs,
                    CommandResult& result) {
  json m;
  m["command"] = command;
  m["version"] = RFPROX_VERSION;
  m["config"] = to_json(config);
  m["inputs"] = inputs;
  m["outputs"] = result.outputs;
  m["summary"] = result.summary;
  const std::string name = "manifest_" + command + ".json";
  write_json(dir / name, m);
  result.outputs.push_back(name);
}

std::vector<std::size_t> scope_rows(const RunConfig& config, const Dataset& d, const TrainTestSplit& sp) {
  if (config.proximity_kind != ProximityKind::original && config.scope != Scope::train)
    throw InvalidParams("OOB and GAP proximities need proximity.scope = \"train\"");
  switch (config.scope) {
    case Scope::train: return sp.train_rows;
    case Scope::test: return sp.test_rows;
    case Scope::all: break;
  }
  std::vector<std::size_t> rows(d.n());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

// Forest params for a run: the configured ones with the run seed.
ForestParams run_params(const RunConfig& config) {
  ForestParams p = config.forest;
  p.seed = config.seed;
  return p;
}

std::string dataset_name(const RunConfig& config) {
  if (config.synthetic) return "synthetic";
  return fs::path(config.dataset->path).stem().string();
}

json report_json(const ClassificationReport& r, const std::vector<std::string>& classes) {
  json j;
  j["accuracy"] = num(r.accuracy);
  j["f1_micro"] = num(r.f1_micro);
  j["f1_macro"] = num(r.f1_macro);
  j["f1_weighted"] = num(r.f1_weighted);
  j["auc_micro"] = num(r.auc_micro);
  j["auc_macro"] = num(r.auc_macro);
  json confusion = json::array();
  for (std::size_t a = 0; a < r.confusion.rows(); ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < r.confusion.cols(); ++b) row.push_back(r.confusion(a, b));
    confusion.push_back(row);
  }
  j["confusion"] = confusion;
  json per_class = json::array();
  for (std::size_t c = 0; c < classes.size(); ++c)
    per_class.push_back({{"class", classes[c]},
                         {"precision", num(r.precision[c])},
                         {"recall", num(r.recall[c])},
                         {"f1", num(r.f1[c])},
                         {"support", r.support[c]}});
  j["per_class"] = per_class;
  return j;
}

struct Scored {
  Dataset data;               // records in scope
  ProximityMatrix proximity;
  OutlierScores scores;
  std::vector<std::uint8_t> flags;
  QuartileAssignment quartiles;
};

Scored score_scope(const RunConfig& config, const Dataset& d, const TrainTestSplit& sp, const Forest& forest) {
  const auto rows = scope_rows(config, d, sp);
  Scored s;
  s.data = d.subset(rows);
  s.proximity = compute_proximity(config.proximity_kind, forest, s.data, config.threads);
  s.scores = compute_outlier_scores(s.proximity, s.data.labels(), s.data.n_classes(), config.outlier, config.threads);
  s.flags = within_class_outliers(s.scores, config.outlier.k_sigma, config.outlier.anchor);
  s.quartiles = quartile_assignment(s.scores, s.data.ids());
  return s;
}

Forest load_model(const fs::path& model, const Dataset& d) {
  if (!fs::exists(model)) throw InputError("model file '" + model.string() + "' not found; run train first");
  Forest forest = load_forest(model);
  forest.check_compatible(d);
  return forest;
}

// Parsed CSV with a header row: column index by name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t col(const std::string& name, const fs::path& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumn(name + "' in '" + path.string());
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  auto records = read_csv_records(in);
  if (records.empty()) throw EmptyFile(path.string());
  Table t;
  t.header = std::move(records.front());
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r].size() != t.header.size())
      throw FormatError("row " + std::to_string(r + 1) + " of '" + path.string() + "' has the wrong width");
  return t;
}

double parse_real(const std::string& s, std::size_t row, std::size_t col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw UnparsableCell(row, col, s);
    return v;
  } catch (const std::logic_error&) {
    throw UnparsableCell(row, col, s);
  }
}

std::size_t parse_count(const std::string& s, std::size_t row, std::size_t col) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw UnparsableCell(row, col, s);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw UnparsableCell(row, col, s);
  }
}

// Series keyed by `key` column, ordered by period.
std::map<std::string, std::vector<double>> read_panel(const fs::path& path, const std::string& key) {
  const Table t = read_table(path);
  const std::size_t kc = t.col(key, path);
  const std::size_t pc = t.col("period", path);
  const std::size_t rc = t.col("return", path);
  std::map<std::string, std::map<std::size_t, double>> by_key;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    by_key[row[kc]][parse_count(row[pc], r, pc)] = parse_real(row[rc], r, rc);
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [k, series] : by_key) {
    auto& v = out[k];
    for (const auto& [period, value] : series) v.push_back(value);
  }
  return out;
}

json box_json(const BoxStats& b) {
  json outliers = json::array();
  for (double o : b.outliers) outliers.push_back(num(o));
  return {{"n", b.n},          {"min", num(b.min)},       {"q1", num(b.q1)},
          {"median", num(b.median)}, {"q3", num(b.q3)}, {"max", num(b.max)},
          {"whisker_low", num(b.whisker_low)}, {"whisker_high", num(b.whisker_high)}, {"outliers", outliers}};
}

}  // namespace

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Dataset load_run_dataset(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic).dataset;
  if (!config.dataset) throw InvalidParams("config needs a 'dataset' or a 'synthetic' section");
  const auto& dc = *config.dataset;
  if (!fs::exists(dc.path)) throw InputError("dataset file '" + dc.path + "' not found");
  FeatureSchema schema = infer_schema(dc.path, dc.label, dc.categorical);
  for (const auto& [name, vocab] : dc.vocabularies) {
    const auto idx = schema.index_of(name);
    if (!idx) throw MissingColumn(name);
    schema.columns[*idx].kind = FeatureKind::categorical;
    schema.columns[*idx].vocabulary = vocab;
  }
  return impute_zero(load_csv(dc.path, schema));
}

fs::path default_model_path(const RunConfig& config) { return config.output_path() / "model.bin"; }
fs::path default_scores_path(const RunConfig& config) { return config.output_path() / "scores.csv"; }

CommandResult cmd_train(const RunConfig& config) {
  const Dataset d = load_run_dataset(config);
  const fs::path dir = prepare_output(config);
  CommandResult result;
  const auto sp = stratified_split(d, config.test_fraction, config.seed);

  ForestParams params = run_params(config);
  json grid_summary = nullptr;
  if (config.grid.enabled) {
    const auto configs = stride_subsample(config.grid.grid.expand(params), config.grid.budget);
    const auto cv = grid_search(sp.train, configs, config.grid.k, config.seed, config.grid.scoring, config.threads);
    {
      auto out = open_out(dir / "cv_table.csv");
      write_cv_table_csv(out, cv);
    }
    result.outputs.push_back("cv_table.csv");
    params = cv.best_config();
    grid_summary = {{"configs", cv.table.size()},
                    {"k", cv.k},
                    {"scoring", to_string(cv.scoring)},
                    {"best_mean", num(cv.table[cv.best].mean)},
                    {"best_std", num(cv.table[cv.best].std)}};
  }

  const Forest forest = fit_forest(sp.train, params, config.threads);
  save_forest(dir / "model.bin", forest);
  result.outputs.push_back("model.bin");

  const auto proba = predict_proba(forest, sp.test, config.threads);
  const auto pred = argmax_rows(proba);
  const auto report = classification_report(sp.test.labels(), pred, proba);

  json misclassified = json::array();
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] != sp.test.label(i)) misclassified.push_back(sp.test.id(i));

  json metrics = report_json(report, d.class_names());
  metrics["dataset"] = dataset_name(config);
  metrics["classes"] = d.class_names();
  metrics["n_train"] = sp.train.n();
  metrics["n_test"] = sp.test.n();
  metrics["misclassified_count"] = misclassified.size();
  metrics["misclassified_ids"] = misclassified;
  metrics["params"] = to_json(params);
  metrics["seed"] = config.seed;
  if (!grid_summary.is_null()) metrics["grid_search"] = grid_summary;
  write_json(dir / "metrics.json", metrics);
  result.outputs.push_back("metrics.json");

  // Predictions for every record, both splits.
  {
    auto out = open_out(dir / "predictions.csv");
    out << "record_id,split,label,predicted,correct";
    for (const auto& c : d.class_names()) out << ',' << csv_escape("p_" + c);
    out << '\n';
    const auto all_proba = predict_proba(forest, d, config.threads);
    const auto all_pred = argmax_rows(all_proba);
    std::vector<char> is_test(d.n(), 0);
    for (std::size_t r : sp.test_rows) is_test[r] = 1;
    for (std::size_t i = 0; i < d.n(); ++i) {
      out << d.id(i) << ',' << (is_test[i] ? "test" : "train") << ',' << csv_escape(d.class_name(d.label(i))) << ','
          << csv_escape(d.class_name(all_pred[i])) << ',' << (all_pred[i] == d.label(i) ? 1 : 0);
      for (double p : all_proba.row(i)) out << ',' << format_double(p);
      out << '\n';
    }
  }
  result.outputs.push_back("predictions.csv");

  if (config.synthetic) {
    write_synthetic(dir / "synthetic", generate_synthetic(*config.synthetic));
    for (const char* f : {"synthetic/dataset.csv", "synthetic/returns.csv", "synthetic/benchmarks.csv", "synthetic/truth.csv"})
      result.outputs.push_back(f);
  }

  result.summary = {{"accuracy", num(report.accuracy)},
                    {"f1_macro", num(report.f1_macro)},
                    {"misclassified_count", misclassified.size()},
                    {"params", to_json(params)}};
  write_manifest(dir, "train", config, json::object(), result);
  return result;
}

CommandResult cmd_score(const RunConfig& config, const fs::path& model) {
  const Dataset d = load_run_dataset(config);
  const Forest forest = load_model(model, d);
  const fs::path dir = prepare_output(config);
  CommandResult result;
  const auto sp = stratified_split(d, config.test_fraction, config.seed);
  const Dataset scope = d.subset(scope_rows(config, d, sp));

  const auto proba = predict_proba(forest, scope, config.threads);
  const auto pred = argmax_rows(proba);
  {
    auto out = open_out(dir / "scored.csv");
    out << "record_id,label,predicted";
    for (const auto& c : d.class_names()) out << ',' << csv_escape("p_" + c);
    out << '\n';
    for (std::size_t i = 0; i < scope.n(); ++i) {
      out << scope.id(i) << ',' << csv_escape(d.class_name(scope.label(i))) << ','
          << csv_escape(d.class_name(pred[i]));
      for (double p : proba.row(i)) out << ',' << format_double(p);
      out << '\n';
    }
  }
  result.outputs.push_back("scored.csv");

  const auto prox = compute_proximity(config.proximity_kind, forest, scope, config.threads);
  write_proximity_binary(dir / "proximity.bin", prox);
  result.outputs.push_back("proximity.bin");
  {
    auto out = open_out(dir / "proximity_ids.csv");
    out << "index,record_id\n";
    for (std::size_t i = 0; i < scope.n(); ++i) out << i << ',' << scope.id(i) << '\n';
  }
  result.outputs.push_back("proximity_ids.csv");
  if (config.proximity_csv_cutoff >= 0.0) {
    auto out = open_out(dir / "proximity.csv");
    write_proximity_csv(out, prox, config.proximity_csv_cutoff);
    result.outputs.push_back("proximity.csv");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scope.n(); ++i) correct += pred[i] == scope.label(i) ? 1 : 0;
  result.summary = {{"n", scope.n()},
                    {"kind", to_string(prox.kind())},
                    {"scope", to_string(config.scope)},
                    {"accuracy", num(static_cast<double>(correct) / static_cast<double>(scope.n()))},
                    {"undefined_pairs", prox.undefined_pair_count()}};
  write_manifest(dir, "score", config, {{"model", model.string()}}, result);
  return result;
}

CommandResult cmd_outliers(const RunConfig& config, const fs::path& model) {
  const Dataset d = load_run_dataset(config);
  const Forest forest = load_model(model, d);
  const fs::path dir = prepare_output(config);
  CommandResult result;
  const auto sp = stratified_split(d, config.test_fraction, config.seed);
  const Scored s = score_scope(config, d, sp, forest);
  const auto& scores = s.scores;
  const Dataset& sd = s.data;
  const std::size_t k = sd.n_classes();

  {
    auto out = open_out(dir / "scores.csv");
    out << "record_id,label,O_own,flag,quartile";
    for (const auto& c : sd.class_names()) out << ',' << csv_escape("O_" + c);
    out << '\n';
    for (std::size_t i = 0; i < sd.n(); ++i) {
      out << sd.id(i) << ',' << csv_escape(sd.class_name(sd.label(i))) << ',' << format_double(scores.own(i)) << ','
          << static_cast<int>(s.flags[i]) << ',' << s.quartiles.quartile[i];
      for (std::size_t c = 0; c < k; ++c) out << ',' << format_double(scores.measure(i, c));
      out << '\n';
    }
  }
  result.outputs.push_back("scores.csv");

  // Cross-class profiles of the flagged records.
  std::size_t novelty_count = 0;
  std::size_t worst = sd.n();
  {
    auto out = open_out(dir / "novelty.csv");
    out << "record_id,label,class,O,threshold,exceeds,novelty\n";
    for (std::size_t i = 0; i < sd.n(); ++i) {
      if (!s.flags[i]) continue;
      const bool novel = is_novelty(scores, i);
      novelty_count += novel ? 1 : 0;
      if (worst == sd.n() || scores.own(i) > scores.own(worst)) worst = i;
      for (std::size_t c = 0; c < k; ++c)
        out << sd.id(i) << ',' << csv_escape(sd.class_name(sd.label(i))) << ','
            << csv_escape(sd.class_name(static_cast<int>(c))) << ',' << format_double(scores.measure(i, c)) << ','
            << format_double(scores.threshold[c]) << ',' << (scores.measure(i, c) > scores.threshold[c] ? 1 : 0)
            << ',' << (novel ? 1 : 0) << '\n';
    }
  }
  result.outputs.push_back("novelty.csv");

  std::vector<ScatterPoint> points(sd.n());
  for (std::size_t i = 0; i < sd.n(); ++i) points[i] = {sd.id(i), scores.own(i), 0.0, sd.label(i), s.flags[i] != 0};
  {
    auto out = open_out(dir / "outliers.svg");
    out << outlier_scatter_svg(points, sd.class_names(), scores.threshold);
  }
  result.outputs.push_back("outliers.svg");
  if (worst < sd.n()) {
    const auto profile = cross_class_profile(scores, worst);
    auto out = open_out(dir / "novelty.svg");
    out << profile_svg(sd.id(worst), sd.class_names(), profile, scores.threshold);
    result.outputs.push_back("novelty.svg");
  }

  // Overlap with test-set misclassifications.
  const auto test_pred = predict(forest, sp.test, config.threads);
  std::set<std::size_t> flagged_ids;
  for (std::size_t i = 0; i < sd.n(); ++i)
    if (s.flags[i]) flagged_ids.insert(sd.id(i));
  json overlap = json::array();
  std::size_t misclassified = 0;
  for (std::size_t i = 0; i < sp.test.n(); ++i) {
    if (test_pred[i] == sp.test.label(i)) continue;
    ++misclassified;
    if (flagged_ids.count(sp.test.id(i))) overlap.push_back(sp.test.id(i));
  }

  std::size_t infinite = 0;
  for (std::size_t i = 0; i < sd.n(); ++i) infinite += std::isinf(scores.own(i)) ? 1 : 0;
  json per_class = json::array();
  const auto counts = sd.class_counts();
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < sd.n(); ++i)
      if (static_cast<std::size_t>(sd.label(i)) == c && s.flags[i]) ++flagged;
    per_class.push_back({{"class", sd.class_name(static_cast<int>(c))},
                         {"n", counts[c]},
                         {"median", num(scores.median[c])},
                         {"deviation", num(scores.deviation[c])},
                         {"threshold", num(scores.threshold[c])},
                         {"flagged", flagged},
                         {"small_class", s.quartiles.small_class[c] != 0}});
  }
  json summary;
  summary["dataset"] = dataset_name(config);
  summary["kind"] = to_string(config.proximity_kind);
  summary["scope"] = to_string(config.scope);
  summary["n"] = sd.n();
  summary["k_sigma"] = num(config.outlier.k_sigma);
  summary["anchor"] = to_string(config.outlier.anchor);
  summary["deviation"] = to_string(config.outlier.deviation);
  summary["outlier_count"] = flagged_ids.size();
  summary["infinite_count"] = infinite;
  summary["novelty_count"] = novelty_count;
  summary["misclassified_count"] = misclassified;
  summary["overlap_count"] = overlap.size();
  summary["overlap_ids"] = overlap;
  summary["per_class"] = per_class;
  write_json(dir / "outliers.json", summary);
  result.outputs.push_back("outliers.json");
  result.summary = {{"outlier_count", flagged_ids.size()},
                    {"novelty_count", novelty_count},
                    {"overlap_count", overlap.size()}};
  write_manifest(dir, "outliers", config, {{"model", model.string()}}, result);
  return result;
}

CommandResult cmd_mds(const RunConfig& config, const fs::path& model) {
  const Dataset d = load_run_dataset(config);
  const Forest forest = load_model(model, d);
  const fs::path dir = prepare_output(config);
  CommandResult result;
  const auto sp = stratified_split(d, config.test_fraction, config.seed);

  std::vector<int> wanted;
  for (const auto& name : config.mds_classes) {
    const auto id = d.class_id(name);
    if (!id) throw UnknownClass(name);
    wanted.push_back(*id);
  }
  const Scored s = score_scope(config, d, sp, forest);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < s.data.n(); ++i)
    if (wanted.empty() || std::find(wanted.begin(), wanted.end(), s.data.label(i)) != wanted.end()) rows.push_back(i);
  if (rows.empty()) throw InvalidParams("no records in the selected classes");

  const auto dm = distance_matrix(subset(s.proximity, rows)).with_zero_diagonal();
  MdsOptions options = config.mds;
  options.seed = config.seed;
  const Embedding e = mds_embed(dm, options);

  std::vector<ScatterPoint> points;
  {
    auto out = open_out(dir / "mds.csv");
    out << "record_id,x,y,label,outlier_flag\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t i = rows[r];
      out << s.data.id(i) << ',' << format_double(e.coordinates(r, 0)) << ',' << format_double(e.coordinates(r, 1))
          << ',' << csv_escape(s.data.class_name(s.data.label(i))) << ',' << static_cast<int>(s.flags[i]) << '\n';
      points.push_back({s.data.id(i), e.coordinates(r, 0), e.coordinates(r, 1), s.data.label(i), s.flags[i] != 0});
    }
  }
  result.outputs.push_back("mds.csv");
  {
    auto out = open_out(dir / "mds.svg");
    out << embedding_svg(points, d.class_names(), "MDS of 1 - proximity (" + to_string(e.method) + ")");
  }
  result.outputs.push_back("mds.svg");

  json trace = json::array();
  for (double v : e.stress_trace) trace.push_back(num(v));
  json classes = json::array();
  if (wanted.empty()) classes = d.class_names();
  else for (int c : wanted) classes.push_back(d.class_name(c));
  json summary = {{"method", to_string(e.method)},
                  {"seed", e.seed},
                  {"n", rows.size()},
                  {"classes", classes},
                  {"stress", num(e.stress)},
                  {"iterations", e.iterations},
                  {"stress_trace", trace}};
  write_json(dir / "mds.json", summary);
  result.outputs.push_back("mds.json");
  result.summary = {{"n", rows.size()}, {"stress", num(e.stress)}};
  write_manifest(dir, "mds", config, {{"model", model.string()}}, result);
  return result;
}

CommandResult cmd_analyze(const RunConfig& config, const fs::path& scores_path, const fs::path& returns_path,
                          const fs::path& benchmarks_path) {
  const Table scores = read_table(scores_path);
  const auto returns = read_panel(returns_path, "record_id");
  const auto benchmarks = read_panel(benchmarks_path, "label");
  const fs::path dir = prepare_output(config);
  CommandResult result;

  const std::size_t id_col = scores.col("record_id", scores_path);
  const std::size_t label_col = scores.col("label", scores_path);
  const std::size_t q_col = scores.col("quartile", scores_path);

  // Classes in order of first appearance.
  std::vector<std::string> classes;
  std::map<std::string, std::size_t> class_index;
  struct Row {
    std::string id;
    std::size_t cls;
    int quartile;
    RegressionResult fit;
  };
  std::vector<Row> rows;
  for (std::size_t r = 0; r < scores.rows.size(); ++r) {
    const auto& row = scores.rows[r];
    const std::string& label = row[label_col];
    if (!class_index.count(label)) {
      class_index[label] = classes.size();
      classes.push_back(label);
    }
    const auto q = static_cast<int>(parse_count(row[q_col], r, q_col));
    if (q < 1 || q > 4) throw UnparsableCell(r, q_col, row[q_col]);
    const auto rit = returns.find(row[id_col]);
    if (rit == returns.end()) throw MissingReturns(parse_count(row[id_col], r, id_col));
    const auto bit = benchmarks.find(label);
    if (bit == benchmarks.end()) throw MissingColumn("benchmark for class '" + label + "'");
    rows.push_back({row[id_col], class_index[label], q, linear_regression_r2(bit->second, rit->second)});
  }

  {
    auto out = open_out(dir / "r2.csv");
    out << "record_id,label,quartile,r_squared,slope,intercept\n";
    for (const auto& r : rows)
      out << r.id << ',' << csv_escape(classes[r.cls]) << ',' << r.quartile << ',' << format_double(r.fit.r_squared)
          << ',' << format_double(r.fit.slope) << ',' << format_double(r.fit.intercept) << '\n';
  }
  result.outputs.push_back("r2.csv");

  json per_class = json::array();
  std::vector<std::vector<BoxStats>> boxes(classes.size(), std::vector<BoxStats>(4));
  bool all_monotone = true;
  std::size_t analyzed = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::vector<double>> by_q(4);
    std::size_t n = 0;
    for (const auto& r : rows)
      if (r.cls == c) {
        by_q[static_cast<std::size_t>(r.quartile - 1)].push_back(r.fit.r_squared);
        ++n;
      }
    json entry = {{"class", classes[c]}, {"n", n}};
    if (n < 4) {
      entry["skipped"] = true;
      entry["warning"] = "fewer than 4 records; quartiles undefined";
      per_class.push_back(entry);
      continue;
    }
    ++analyzed;
    json quartiles = json::array();
    bool monotone = true;
    for (std::size_t q = 0; q < 4; ++q) {
      if (by_q[q].empty()) {
        monotone = false;
        quartiles.push_back({{"quartile", q + 1}, {"n", 0}});
        continue;
      }
      boxes[c][q] = box_stats(by_q[q]);
      json b = box_json(boxes[c][q]);
      b["quartile"] = q + 1;
      quartiles.push_back(b);
      if (q > 0 && !(boxes[c][q].median < boxes[c][q - 1].median)) monotone = false;
    }
    entry["skipped"] = false;
    entry["quartiles"] = quartiles;
    entry["median_r2_strictly_decreasing"] = monotone;
    all_monotone = all_monotone && monotone;
    per_class.push_back(entry);
  }
  json summary = {{"classes", per_class},
                  {"analyzed_classes", analyzed},
                  {"all_strictly_decreasing", analyzed > 0 && all_monotone}};
  write_json(dir / "analysis.json", summary);
  result.outputs.push_back("analysis.json");
  {
    auto out = open_out(dir / "analysis.svg");
    out << quartile_boxes_svg(classes, boxes, "R^2 of returns on class benchmark");
  }
  result.outputs.push_back("analysis.svg");
  result.summary = {{"analyzed_classes", analyzed}, {"all_strictly_decreasing", analyzed > 0 && all_monotone}};
  write_manifest(dir, "analyze", config,
                 {{"scores", scores_path.string()}, {"returns", returns_path.string()},
                  {"benchmarks", benchmarks_path.string()}},
                 result);
  return result;
}

CommandResult cmd_report(const RunConfig& config, const fs::path& run_dir) {
  std::vector<std::string> missing;
  for (const char* f : {"metrics.json", "outliers.json"})
    if (!fs::exists(run_dir / f)) missing.emplace_back(f);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingArtifacts("run directory '" + run_dir.string() + "' lacks " + list);
  }
  const json metrics = read_json(run_dir / "metrics.json");
  const json outliers = read_json(run_dir / "outliers.json");
  json report;
  report["version"] = RFPROX_VERSION;
  report["dataset"] = metrics.value("dataset", "");
  json cls;
  for (const char* key : {"accuracy", "f1_micro", "f1_macro", "f1_weighted", "auc_micro", "auc_macro"})
    cls[key] = metrics.value(key, json(nullptr));
  cls["n_test"] = metrics.value("n_test", json(nullptr));
  cls["params"] = metrics.value("params", json(nullptr));
  report["classification"] = cls;
  report["misclassified_count"] = metrics.value("misclassified_count", json(nullptr));
  report["outlier_count"] = outliers.value("outlier_count", json(nullptr));
  report["overlap_count"] = outliers.value("overlap_count", json(nullptr));
  report["overlap_ids"] = outliers.value("overlap_ids", json::array());
  report["novelty_count"] = outliers.value("novelty_count", json(nullptr));
  report["outlier_settings"] = {{"k_sigma", outliers.value("k_sigma", json(nullptr))},
                                {"anchor", outliers.value("anchor", json(nullptr))},
                                {"deviation", outliers.value("deviation", json(nullptr))},
                                {"kind", outliers.value("kind", json(nullptr))},
                                {"scope", outliers.value("scope", json(nullptr))}};
  if (fs::exists(run_dir / "analysis.json")) {
    const json a = read_json(run_dir / "analysis.json");
    json medians = json::array();
    for (const auto& c : a["classes"]) {
      json m = {{"class", c["class"]}};
      if (c.value("skipped", false)) {
        m["skipped"] = true;
      } else {
        json qs = json::array();
        for (const auto& q : c["quartiles"]) qs.push_back(q.value("median", json(nullptr)));
        m["median_r2"] = qs;
      }
      medians.push_back(m);
    }
    report["analysis"] = {{"all_strictly_decreasing", a.value("all_strictly_decreasing", false)},
                          {"median_r2_by_quartile", medians}};
  }
  if (fs::exists(run_dir / "mds.json")) {
    const json m = read_json(run_dir / "mds.json");
    report["mds"] = {{"method", m.value("method", json(nullptr))},
                     {"stress", m.value("stress", json(nullptr))},
                     {"n", m.value("n", json(nullptr))}};
  }
  json manifests = json::array();
  for (const char* cmd : {"train", "score", "outliers", "mds", "analyze", "synth"}) {
    const std::string name = std::string("manifest_") + cmd + ".json";
    if (fs::exists(run_dir / name)) manifests.push_back(name);
  }
  report["manifests"] = manifests;

  CommandResult result;
  const fs::path dir = prepare_output(config);
  write_json(dir / "report.json", report);
  result.outputs.push_back("report.json");
  result.summary = {{"misclassified_count", report["misclassified_count"]},
                    {"outlier_count", report["outlier_count"]},
                    {"overlap_count", report["overlap_count"]}};
  write_manifest(dir, "report", config, {{"run_dir", run_dir.string()}}, result);
  return result;
}

CommandResult cmd_synth(const RunConfig& config) {
  const SyntheticSpec spec = config.synthetic.value_or(SyntheticSpec{});
  const fs::path dir = prepare_output(config);
  CommandResult result;
  const auto data = generate_synthetic(spec);
  write_synthetic(dir / "synthetic", data);
  for (const char* f : {"synthetic/dataset.csv", "synthetic/returns.csv", "synthetic/benchmarks.csv", "synthetic/truth.csv"})
    result.outputs.push_back(f);
  std::size_t injected = 0;
  for (bool b : data.is_injected) injected += b ? 1 : 0;
  result.summary = {{"n", data.dataset.n()}, {"injected", injected}, {"spec", to_json(spec)}};
  write_manifest(dir, "synth", config, json::object(), result);
  return result;
}

}  // namespace rfprox::cli
