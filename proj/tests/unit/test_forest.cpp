#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rfprox/data/split.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/forest/serialize.hpp"
#include "rfprox/forest/tree.hpp"
#include "support.hpp"

using namespace rfprox;

namespace {

// Two classes split by x0 < 0 / x0 > 10.
Dataset separable(std::size_t n_per_class, std::uint64_t seed) {
  Rng rng(seed);
  FeatureSchema s;
  s.columns = {{"x0", FeatureKind::numeric, {}}, {"x1", FeatureKind::numeric, {}}};
  s.label_column = "y";
  Matrix<double> x(2 * n_per_class, 2);
  std::vector<int> y(2 * n_per_class);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    y[i] = i < n_per_class ? 0 : 1;
    x(i, 0) = (y[i] == 0 ? -1.0 : 11.0) - 10.0 * uniform_unit(rng) * (y[i] == 0 ? 1 : -1);
    x(i, 1) = uniform_unit(rng);
  }
  return Dataset(s, x, y, {"a", "b"});
}

// Walks a tree from the root and returns the deepest level reached.
int max_level(const DecisionTree& t, std::int32_t node = 0, int level = 0) {
  const auto& nd = t.nodes()[static_cast<std::size_t>(node)];
  if (nd.is_leaf()) return level;
  return std::max(max_level(t, nd.left, level + 1), max_level(t, nd.right, level + 1));
}

Forest single_leaf_forest(std::size_t n_train, std::size_t k) {
  FeatureSchema s;
  s.columns = {{"x0", FeatureKind::numeric, {}}};
  s.label_column = "y";
  TreeNode leaf;
  leaf.leaf = 0;
  Matrix<double> dist(1, k, 1.0 / static_cast<double>(k));
  DecisionTree tree({leaf}, dist, 0);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
  ForestParams p;
  p.n_trees = 1;
  return Forest(p, s, names, std::vector<double>(k, 1.0), {tree}, {std::vector<std::uint32_t>(n_train, 1)});
}

}  // namespace

TEST_CASE("separable classes are fit perfectly") {
  const Dataset d = separable(30, 1);
  ForestParams p;
  p.n_trees = 10;
  const Forest f = fit_forest(d, p);
  CHECK(f.n_trees() == 10);
  const auto pred = predict(f, d);
  for (std::size_t i = 0; i < d.n(); ++i) CHECK(pred[i] == d.label(i));
  const auto proba = predict_proba(f, d);
  for (std::size_t i = 0; i < d.n(); ++i) CHECK(proba(i, static_cast<std::size_t>(d.label(i))) >= 0.99);
}

TEST_CASE("a depth-1 single tree is a stump") {
  const Dataset d = test::load_fixture("iris.csv");
  ForestParams p;
  p.n_trees = 1;
  p.max_depth = 1;
  const Forest f = fit_forest(d, p);
  CHECK(f.trees()[0].n_leaves() <= 2);
  CHECK(f.trees()[0].depth() <= 1);
}

TEST_CASE("depth bound holds and leaf distributions are normalized") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = test::random_dataset(rng, 30 + uniform_index(rng, 50), 3, 3, 0.7);
    ForestParams p;
    p.n_trees = 2;
    p.max_depth = 1 + static_cast<int>(uniform_index(rng, 4));
    p.criterion = static_cast<Criterion>(uniform_index(rng, 3));
    p.seed = static_cast<std::uint64_t>(trial);
    const Forest f = fit_forest(d, p, 1);
    for (const auto& t : f.trees()) {
      CHECK(max_level(t) <= *p.max_depth);
      CHECK(t.depth() == max_level(t));
      std::vector<int> seen(t.n_leaves(), 0);
      for (const auto& nd : t.nodes()) {
        if (nd.is_leaf()) {
          ++seen[static_cast<std::size_t>(nd.leaf)];
        } else {
          CHECK(nd.left > 0);
          CHECK(nd.right > 0);
        }
      }
      for (int s : seen) CHECK(s == 1);
      for (std::size_t l = 0; l < t.n_leaves(); ++l) {
        double sum = 0.0;
        for (double v : t.distribution(static_cast<std::int32_t>(l))) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("apply") {
  const Dataset d = test::load_fixture("iris.csv");
  ForestParams p;
  p.n_trees = 20;
  const Forest f = fit_forest(d, p);

  SUBCASE("pure leaves reproduce the label of in-bag training records") {
    const LeafMatrix leaves = apply(f, d);
    for (std::size_t t = 0; t < f.n_trees(); ++t) {
      const auto counts = f.bootstrap_counts(t);
      for (std::size_t i = 0; i < d.n(); ++i) {
        if (counts[i] == 0) continue;
        const auto dist = f.trees()[t].distribution(leaves(i, t));
        int best = 0;
        for (std::size_t c = 1; c < dist.size(); ++c)
          if (dist[c] > dist[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
        // Identical feature rows with different labels can share a leaf.
        if (dist[static_cast<std::size_t>(best)] == 1.0) CHECK(best == d.label(i));
      }
    }
  }
  SUBCASE("identical rows land in identical leaves; repeated calls agree") {
    std::vector<std::size_t> rows{0, 0, 5, 5};
    const Dataset dup = d.subset(rows);
    const LeafMatrix a = apply(f, dup);
    for (std::size_t t = 0; t < f.n_trees(); ++t) {
      CHECK(a(0, t) == a(1, t));
      CHECK(a(2, t) == a(3, t));
    }
    CHECK(apply(f, d, 1) == apply(f, d, 4));
  }
  SUBCASE("single-leaf tree maps everything to leaf 0") {
    const Forest one = single_leaf_forest(3, 2);
    FeatureSchema s = one.schema();
    const Dataset x(s, Matrix<double>(4, 1, 2.5), {0, 1, 0, 1}, {"c0", "c1"});
    const LeafMatrix leaves = apply(one, x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(leaves(i, 0) == 0);
  }
  SUBCASE("schema mismatch") {
    const Dataset wine = test::load_fixture("wine.csv");
    CHECK_THROWS_AS(apply(f, wine), SchemaMismatch);
    CHECK_THROWS_AS(predict_proba(f, wine), SchemaMismatch);
  }
}

TEST_CASE("predict_proba and predict") {
  const Dataset d = test::load_fixture("wine.csv");
  SUBCASE("single tree: probabilities are that tree's leaf distributions") {
    ForestParams p;
    p.n_trees = 1;
    const Forest f = fit_forest(d, p);
    const auto proba = predict_proba(f, d);
    const auto leaves = apply(f, d);
    for (std::size_t i = 0; i < d.n(); ++i) {
      const auto dist = f.trees()[0].distribution(leaves(i, 0));
      for (std::size_t c = 0; c < d.n_classes(); ++c) CHECK(proba(i, c) == dist[c]);
    }
  }
  SUBCASE("rows sum to one") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const Dataset r = test::random_dataset(rng, 40, 3, 3, 0.5);
      ForestParams p;
      p.n_trees = 3;
      p.seed = static_cast<std::uint64_t>(trial);
      const Forest f = fit_forest(r, p, 1);
      const Dataset probe = test::random_dataset(rng, 20, 3, 3, 0.5);
      const auto proba = predict_proba(f, probe);
      for (std::size_t i = 0; i < probe.n(); ++i) {
        double sum = 0.0;
        for (double v : proba.row(i)) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
  SUBCASE("argmax ties go to the smaller class") {
    Matrix<double> m(2, 2);
    m(0, 0) = 0.2;
    m(0, 1) = 0.8;
    m(1, 0) = 0.5;
    m(1, 1) = 0.5;
    CHECK(argmax_rows(m) == std::vector<int>{1, 0});
  }
  SUBCASE("wine test accuracy") {
    const auto sp = stratified_split(d, 0.2, 0);
    ForestParams p;
    p.n_trees = 200;
    const Forest f = fit_forest(sp.train, p);
    const auto pred = predict(f, sp.test);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == sp.test.label(i) ? 1 : 0;
    CHECK(static_cast<double>(ok) / static_cast<double>(pred.size()) >= 0.97);
  }
}

TEST_CASE("out-of-bag bookkeeping") {
  SUBCASE("OOB fraction approaches 1/e") {
    Rng rng(6);
    const Dataset d = test::random_dataset(rng, 1000, 1, 2, 3.0);
    ForestParams p;
    p.n_trees = 100;
    p.max_depth = 1;
    const Forest f = fit_forest(d, p);
    const auto oob = oob_indicator(f);
    double total = 0.0;
    for (std::uint8_t v : oob.data()) total += v;
    const double mean = total / static_cast<double>(oob.data().size());
    CHECK(mean > 0.34);
    CHECK(mean < 0.38);
    for (std::size_t t = 0; t < f.n_trees(); ++t) {
      std::size_t drawn = 0;
      for (std::size_t i = 0; i < d.n(); ++i) {
        drawn += f.bootstrap_counts(t)[i];
        CHECK(static_cast<bool>(oob(i, t)) == (f.bootstrap_counts(t)[i] == 0));
      }
      CHECK(drawn == d.n());
    }
  }
  SUBCASE("a bootstrap covering every record leaves no OOB entries") {
    const Forest f = single_leaf_forest(1, 2);
    const auto oob = oob_indicator(f);
    CHECK(oob.rows() == 1);
    CHECK(oob(0, 0) == 0);
  }
}

TEST_CASE("fit is deterministic and independent of thread count") {
  const Dataset d = test::load_fixture("breast_cancer.csv");
  ForestParams p;
  p.n_trees = 24;
  p.seed = 99;
  const Forest a = fit_forest(d, p, 1);
  const Forest b = fit_forest(d, p, 4);
  const Forest c = fit_forest(d, p, 0);
  CHECK(a == b);
  CHECK(a == c);
  p.seed = 100;
  CHECK_FALSE(fit_forest(d, p, 2) == a);
}

TEST_CASE("balanced weights favour the split that isolates the minority class") {
  // 90 of class 0, 10 of class 1. Feature 0 separates the ten class-1
  // records; feature 1 separates ten class-0 records equally cleanly.
  FeatureSchema s;
  s.columns = {{"iso_minority", FeatureKind::numeric, {}}, {"iso_majority", FeatureKind::numeric, {}}};
  s.label_column = "y";
  Matrix<double> x(100, 2, 0.0);
  std::vector<int> y(100, 0);
  for (std::size_t i = 0; i < 100; ++i) {
    if (i >= 90) {
      y[i] = 1;
      x(i, 0) = 1.0;
    }
    if (i < 10) x(i, 1) = 1.0;
  }
  const auto w = balanced_class_weights(y, 2);
  TreeOptions opt;
  opt.features_per_split = 2;
  opt.max_depth = 1;
  for (auto crit : {Criterion::gini, Criterion::entropy, Criterion::log_loss}) {
    opt.criterion = crit;
    Rng rng(1);
    const std::vector<std::uint32_t> mult(100, 1);
    const DecisionTree t = grow_tree(x, y, 2, mult, w, opt, rng);
    REQUIRE_FALSE(t.nodes()[0].is_leaf());
    CHECK(t.nodes()[0].feature == 0);
  }
}

TEST_CASE("constant features make a leaf") {
  FeatureSchema s;
  s.columns = {{"c", FeatureKind::numeric, {}}};
  s.label_column = "y";
  const Dataset d(s, Matrix<double>(10, 1, 3.0), {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, {"a", "b"});
  ForestParams p;
  p.n_trees = 3;
  const Forest f = fit_forest(d, p);
  for (const auto& t : f.trees()) CHECK(t.nodes().size() == 1);
}

TEST_CASE("fit error paths") {
  const Dataset d = test::load_fixture("iris.csv");
  ForestParams p;
  p.n_trees = 0;
  CHECK_THROWS_AS(fit_forest(d, p), InvalidParams);
  p = {};
  p.max_depth = 0;
  CHECK_THROWS_AS(fit_forest(d, p), InvalidParams);
  p = {};
  p.min_samples_leaf = 0;
  CHECK_THROWS_AS(fit_forest(d, p), InvalidParams);
  p = {};
  p.class_weights = {1.0, 2.0};
  CHECK_THROWS_AS(fit_forest(d, p), InvalidParams);

  std::vector<std::size_t> setosa;
  for (std::size_t i = 0; i < d.n(); ++i)
    if (d.label(i) == 0) setosa.push_back(i);
  FeatureSchema s = d.schema();
  Matrix<double> x(setosa.size(), d.n_features());
  for (std::size_t r = 0; r < setosa.size(); ++r)
    for (std::size_t f = 0; f < d.n_features(); ++f) x(r, f) = d.at(setosa[r], f);
  const Dataset one(s, x, std::vector<int>(setosa.size(), 0), {"setosa"});
  CHECK_THROWS_AS(fit_forest(one, ForestParams{}), SingleClassInput);

  test::TempDir dir("forest_missing");
  test::write_text(dir / "m.csv", "a,y\n1,x\n,z\n2,x\n3,z\n");
  FeatureSchema ms;
  ms.columns = {{"a", FeatureKind::numeric, {}}};
  ms.label_column = "y";
  CHECK_THROWS_AS(fit_forest(load_csv(dir / "m.csv", ms), ForestParams{}), MissingValues);
}

TEST_CASE("features_per_split") {
  CHECK(features_per_split(MaxFeatures::sqrt, 4) == 2);
  CHECK(features_per_split(MaxFeatures::sqrt, 13) == 4);
  CHECK(features_per_split(MaxFeatures::log2, 64) == 6);
  CHECK(features_per_split(MaxFeatures::log2, 1) == 1);
  CHECK(features_per_split(MaxFeatures::all, 7) == 7);
}

TEST_CASE("model round trip") {
  const Dataset d = test::load_fixture("car.csv");
  ForestParams p;
  p.n_trees = 5;
  p.max_depth = 6;
  p.criterion = Criterion::entropy;
  const Forest f = fit_forest(d, p);
  std::stringstream buf;
  save_forest(buf, f);
  const std::string bytes = buf.str();
  std::istringstream in(bytes);
  const Forest g = load_forest(in);
  CHECK(g == f);
  CHECK(predict_proba(g, d) == predict_proba(f, d));

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_forest(truncated), FormatError);
  std::string corrupt = bytes;
  corrupt[0] = 'X';
  std::istringstream bad(corrupt);
  CHECK_THROWS_AS(load_forest(bad), FormatError);
  CHECK_THROWS_AS(load_forest(std::filesystem::path("/nonexistent/model.bin")), InputError);
}

TEST_CASE("parameter names") {
  CHECK(parse_criterion("log_loss") == Criterion::log_loss);
  CHECK(parse_max_features("log2") == MaxFeatures::log2);
  CHECK(to_string(Criterion::entropy) == "entropy");
  CHECK_THROWS_AS(parse_criterion("mse"), InvalidParams);
}
