#include "rfprox/modelsel.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "rfprox/data/csv.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/metrics.hpp"
#include "rfprox/parallel.hpp"

namespace rfprox {

Grid Grid::table3() {
  Grid g;
  for (int t = 100; t <= 1000; t += 100) g.n_trees.push_back(t);
  for (int d = 5; d <= 50; d += 5) g.max_depth.emplace_back(d);
  g.max_depth.emplace_back(std::nullopt);
  g.max_features = {MaxFeatures::sqrt, MaxFeatures::log2};
  g.criterion = {Criterion::gini, Criterion::entropy, Criterion::log_loss};
  return g;
}

std::size_t Grid::size() const { return n_trees.size() * max_depth.size() * max_features.size() * criterion.size(); }

void Grid::validate() const {
  if (n_trees.empty() || max_depth.empty() || max_features.empty() || criterion.empty())
    throw InvalidParams("every grid axis needs at least one value");
}

std::vector<ForestParams> Grid::expand(const ForestParams& base) const {
  validate();
  std::vector<ForestParams> out;
  out.reserve(size());
  for (int t : n_trees)
    for (const auto& d : max_depth)
      for (MaxFeatures m : max_features)
        for (Criterion c : criterion) {
          ForestParams p = base;
          p.n_trees = t;
          p.max_depth = d;
          p.max_features = m;
          p.criterion = c;
          p.validate();
          out.push_back(std::move(p));
        }
  return out;
}

std::vector<ForestParams> stride_subsample(const std::vector<ForestParams>& configs, std::size_t budget) {
  if (budget == 0 || budget >= configs.size()) return configs;
  const std::size_t stride = (configs.size() + budget - 1) / budget;
  std::vector<ForestParams> out;
  for (std::size_t i = 0; i < configs.size(); i += stride) out.push_back(configs[i]);
  return out;
}

std::string to_string(Scoring s) { return s == Scoring::accuracy ? "accuracy" : "f1_macro"; }

Scoring parse_scoring(const std::string& text) {
  if (text == "accuracy") return Scoring::accuracy;
  if (text == "f1_macro") return Scoring::f1_macro;
  throw InvalidParams("unknown scoring '" + text + "'");
}

std::size_t select_best(const std::vector<ConfigResult>& table) {
  const auto depth_rank = [](const ForestParams& p) {
    return p.max_depth ? static_cast<long long>(*p.max_depth) : std::numeric_limits<long long>::max();
  };
  std::size_t best = 0;
  for (std::size_t c = 1; c < table.size(); ++c) {
    const auto& a = table[c];
    const auto& b = table[best];
    if (a.mean > b.mean) {
      best = c;
    } else if (a.mean == b.mean) {
      if (a.params.n_trees < b.params.n_trees ||
          (a.params.n_trees == b.params.n_trees && depth_rank(a.params) < depth_rank(b.params)))
        best = c;
    }
  }
  return best;
}

CVResult grid_search(const Dataset& train, const FoldPlan& folds, const std::vector<ForestParams>& configs,
                     Scoring scoring, unsigned threads) {
  if (configs.empty()) throw InvalidParams("no configurations to evaluate");
  for (const auto& p : configs) p.validate();
  const auto k = static_cast<std::size_t>(folds.k);

  std::vector<Dataset> fit_sets;
  std::vector<Dataset> val_sets;
  for (int f = 0; f < folds.k; ++f) {
    const auto fit_rows = folds.rows_not_in(f);
    const auto val_rows = folds.rows_in(f);
    fit_sets.push_back(train.subset(fit_rows));
    val_sets.push_back(train.subset(val_rows));
  }

  std::vector<double> scores(configs.size() * k, 0.0);
  parallel_for(scores.size(), threads, [&](std::size_t task) {
    const std::size_t c = task / k;
    const std::size_t f = task % k;
    const Forest forest = fit_forest(fit_sets[f], configs[c], 1);
    const Dataset& val = val_sets[f];
    const auto proba = predict_proba(forest, val, 1);
    const auto pred = argmax_rows(proba);
    const auto report = classification_report(val.labels(), pred, proba);
    scores[task] = scoring == Scoring::accuracy ? report.accuracy : report.f1_macro;
  });

  CVResult result;
  result.scoring = scoring;
  result.k = folds.k;
  result.fold_seed = folds.seed;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    ConfigResult row;
    row.params = configs[c];
    row.fold_scores.assign(scores.begin() + static_cast<std::ptrdiff_t>(c * k),
                           scores.begin() + static_cast<std::ptrdiff_t>((c + 1) * k));
    double sum = 0.0;
    for (double s : row.fold_scores) sum += s;
    row.mean = sum / static_cast<double>(k);
    double ss = 0.0;
    for (double s : row.fold_scores) ss += (s - row.mean) * (s - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(k));
    result.table.push_back(std::move(row));
  }
  result.best = select_best(result.table);
  return result;
}

CVResult grid_search(const Dataset& train, const std::vector<ForestParams>& configs, int k, std::uint64_t seed,
                     Scoring scoring, unsigned threads) {
  const FoldPlan folds = stratified_kfold(train, k, seed);
  return grid_search(train, folds, configs, scoring, threads);
}

void write_cv_table_csv(std::ostream& out, const CVResult& result) {
  out << "n_trees,max_depth,max_features,criterion,mean,std";
  for (int f = 0; f < result.k; ++f) out << ",fold_" << f;
  out << ",best\n";
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const auto& row = result.table[c];
    out << row.params.n_trees << ',' << (row.params.max_depth ? std::to_string(*row.params.max_depth) : "none") << ','
        << to_string(row.params.max_features) << ',' << to_string(row.params.criterion) << ','
        << format_double(row.mean) << ',' << format_double(row.std);
    for (double s : row.fold_scores) out << ',' << format_double(s);
    out << ',' << (c == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace rfprox
