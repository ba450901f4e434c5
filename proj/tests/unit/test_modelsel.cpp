#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rfprox/data/split.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/metrics.hpp"
#include "rfprox/modelsel.hpp"
#include "support.hpp"

using namespace rfprox;

namespace {

ConfigResult row(int trees, std::optional<int> depth, double mean) {
  ConfigResult r;
  r.params.n_trees = trees;
  r.params.max_depth = depth;
  r.mean = mean;
  return r;
}

}  // namespace

TEST_CASE("full grid has 660 configs in nesting order") {
  const Grid g = Grid::table3();
  CHECK(g.size() == 660);
  const auto configs = g.expand();
  REQUIRE(configs.size() == 660);
  CHECK(configs.front().n_trees == 100);
  CHECK(configs.front().max_depth == 5);
  CHECK(configs.front().max_features == MaxFeatures::sqrt);
  CHECK(configs.front().criterion == Criterion::gini);
  CHECK(configs[1].criterion == Criterion::entropy);
  CHECK(configs[3].max_features == MaxFeatures::log2);
  CHECK(configs[6].max_depth == 10);
  CHECK(configs[66].n_trees == 200);
  CHECK(configs.back().n_trees == 1000);
  CHECK(!configs.back().max_depth.has_value());
  CHECK(configs.back().criterion == Criterion::log_loss);
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (std::size_t j = i + 1; j < configs.size(); ++j) REQUIRE(!(configs[i] == configs[j]));
}

TEST_CASE("grid expansion keeps base fields and rejects empty axes") {
  ForestParams base;
  base.seed = 42;
  base.min_samples_leaf = 3;
  Grid g;
  g.n_trees = {10};
  g.max_depth = {std::nullopt};
  g.max_features = {MaxFeatures::all};
  g.criterion = {Criterion::entropy};
  const auto c = g.expand(base);
  REQUIRE(c.size() == 1);
  CHECK(c[0].seed == 42);
  CHECK(c[0].min_samples_leaf == 3);
  g.criterion.clear();
  CHECK_THROWS_AS(g.expand(), InvalidParams);
}

TEST_CASE("stride_subsample") {
  const auto all = Grid::table3().expand();
  CHECK(stride_subsample(all, 0).size() == 660);
  CHECK(stride_subsample(all, 1000).size() == 660);
  const auto s = stride_subsample(all, 100);  // stride 7
  CHECK(s.size() == 95);
  CHECK(s[0] == all[0]);
  CHECK(s[1] == all[7]);
  CHECK(stride_subsample(all, 1).size() == 1);
}

TEST_CASE("select_best tie-breaks") {
  SUBCASE("highest mean") { CHECK(select_best({row(100, 5, 0.9), row(100, 5, 0.95), row(100, 5, 0.94)}) == 1); }
  SUBCASE("fewer trees") { CHECK(select_best({row(300, 5, 0.9), row(100, 50, 0.9), row(200, 5, 0.9)}) == 1); }
  SUBCASE("shallower depth, unbounded deepest") {
    CHECK(select_best({row(100, std::nullopt, 0.9), row(100, 50, 0.9)}) == 1);
    CHECK(select_best({row(100, 20, 0.9), row(100, 10, 0.9)}) == 1);
  }
  SUBCASE("earlier config on a full tie") { CHECK(select_best({row(100, 5, 0.9), row(100, 5, 0.9)}) == 0); }
}

TEST_CASE("grid_search on a single config") {
  Rng rng(3);
  const Dataset d = test::random_dataset(rng, 60, 3, 2, 3.0);
  ForestParams p;
  p.n_trees = 20;
  const auto r = grid_search(d, {p}, 3, 1);
  REQUIRE(r.table.size() == 1);
  CHECK(r.best == 0);
  CHECK(r.best_config() == p);
  CHECK(r.k == 3);
  CHECK(r.fold_seed == 1);
}

TEST_CASE("fold scores match a hand-run cross validation") {
  Rng rng(5);
  const Dataset d = test::random_dataset(rng, 90, 4, 3, 1.0);
  ForestParams a, b;
  a.n_trees = 15;
  b.n_trees = 10;
  b.max_depth = 2;
  b.criterion = Criterion::entropy;
  for (Scoring scoring : {Scoring::accuracy, Scoring::f1_macro}) {
    const FoldPlan folds = stratified_kfold(d, 4, 11);
    const auto r = grid_search(d, folds, {a, b}, scoring, 1);
    REQUIRE(r.table.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& cfg = c == 0 ? a : b;
      REQUIRE(r.table[c].fold_scores.size() == 4);
      double sum = 0.0, sq = 0.0;
      for (int f = 0; f < 4; ++f) {
        const auto fit_rows = folds.rows_not_in(f);
        const auto val_rows = folds.rows_in(f);
        const Dataset fit = d.subset(fit_rows);
        const Dataset val = d.subset(val_rows);
        const Forest forest = fit_forest(fit, cfg, 1);
        const auto pred = predict(forest, val, 1);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == val.labels()[i];
        const double acc = static_cast<double>(hits) / static_cast<double>(pred.size());
        if (scoring == Scoring::accuracy) CHECK(r.table[c].fold_scores[f] == doctest::Approx(acc).epsilon(1e-12));
        sum += r.table[c].fold_scores[f];
      }
      const double mean = sum / 4.0;
      for (double s : r.table[c].fold_scores) sq += (s - mean) * (s - mean);
      CHECK(std::abs(r.table[c].mean - mean) <= 1e-12);
      CHECK(r.table[c].std == doctest::Approx(std::sqrt(sq / 4.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("a dominant config wins and dominated additions change nothing") {
  Rng rng(8);
  const Dataset d = test::random_dataset(rng, 120, 4, 3, 2.5);
  ForestParams strong, weak, weaker;
  strong.n_trees = 30;
  weak.n_trees = 30;
  weak.max_depth = 1;  // one split cannot separate three classes
  weaker = weak;
  weaker.n_trees = 1;
  const auto r = grid_search(d, {weak, strong}, 3, 0);
  CHECK(r.best == 1);
  CHECK(r.table[1].mean > r.table[0].mean);
  const auto r2 = grid_search(d, {weak, strong, weaker}, 3, 0);
  CHECK(r2.best_config() == strong);
  CHECK(r2.table[1].mean == r.table[1].mean);
}

TEST_CASE("thread count does not change the table") {
  Rng rng(12);
  const Dataset d = test::random_dataset(rng, 60, 3, 2, 1.0);
  Grid g;
  g.n_trees = {5, 10};
  g.max_depth = {2, std::nullopt};
  g.max_features = {MaxFeatures::sqrt};
  g.criterion = {Criterion::gini};
  const auto configs = g.expand();
  const auto a = grid_search(d, configs, 3, 4, Scoring::accuracy, 1);
  const auto b = grid_search(d, configs, 3, 4, Scoring::accuracy, 4);
  REQUIRE(a.table.size() == b.table.size());
  for (std::size_t c = 0; c < a.table.size(); ++c) CHECK(a.table[c].fold_scores == b.table[c].fold_scores);
  CHECK(a.best == b.best);
}

TEST_CASE("reduced grid on wine reaches high cross-validated accuracy") {
  const Dataset wine = test::load_fixture("wine.csv");
  const auto split = stratified_split(wine, 0.2, 0);
  Grid g;
  g.n_trees = {100, 200};
  g.max_depth = {5, 10, std::nullopt};
  g.max_features = {MaxFeatures::sqrt};
  g.criterion = {Criterion::gini};
  const auto r = grid_search(split.train, g.expand(), 5, 0);
  CHECK(r.table[r.best].mean >= 0.95);
}

TEST_CASE("cv table CSV") {
  Rng rng(1);
  const Dataset d = test::random_dataset(rng, 40, 2, 2, 3.0);
  ForestParams a, b;
  a.n_trees = 5;
  b.n_trees = 6;
  b.max_depth = 3;
  const auto r = grid_search(d, {a, b}, 2, 0);
  std::ostringstream out;
  write_cv_table_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n_trees,max_depth,max_features,criterion,mean,std,fold_0,fold_1,best");
  std::getline(in, line);
  CHECK(line.rfind("5,none,sqrt,gini,", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("6,3,sqrt,gini,", 0) == 0);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("scoring names and errors") {
  CHECK(parse_scoring("accuracy") == Scoring::accuracy);
  CHECK(parse_scoring(to_string(Scoring::f1_macro)) == Scoring::f1_macro);
  CHECK_THROWS_AS(parse_scoring("auc"), InvalidParams);
  CHECK_THROWS_AS(grid_search(test::load_fixture("iris.csv"), {}, 3, 0), InvalidParams);
}
