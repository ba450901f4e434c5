#include "rfprox/forest/forest.hpp"

#include <algorithm>

#include "rfprox/errors.hpp"
#include "rfprox/parallel.hpp"
#include "rfprox/rng.hpp"

namespace rfprox {

Forest::Forest(ForestParams params, FeatureSchema schema, std::vector<std::string> class_names,
               std::vector<double> class_weights, std::vector<DecisionTree> trees,
               std::vector<std::vector<std::uint32_t>> bootstrap_counts)
    : params_(std::move(params)),
      schema_(std::move(schema)),
      class_names_(std::move(class_names)),
      class_weights_(std::move(class_weights)),
      trees_(std::move(trees)),
      bootstrap_counts_(std::move(bootstrap_counts)) {
  if (bootstrap_counts_.size() != trees_.size()) throw LengthMismatch(bootstrap_counts_.size(), trees_.size());
  n_train_ = bootstrap_counts_.empty() ? 0 : bootstrap_counts_.front().size();
  for (const auto& counts : bootstrap_counts_) {
    if (counts.size() != n_train_) throw LengthMismatch(counts.size(), n_train_);
  }
}

void Forest::check_compatible(const Dataset& d) const {
  if (!d.schema().compatible_with(schema_)) throw SchemaMismatch("dataset features differ from the model's");
  if (d.class_names() != class_names_) throw SchemaMismatch("dataset classes differ from the model's");
}

namespace {

std::vector<double> effective_class_weights(const Dataset& train, const ForestParams& params) {
  const std::size_t k = train.n_classes();
  if (!params.class_weights.empty()) {
    if (params.class_weights.size() != k) throw InvalidParams("class_weights needs one weight per class");
    return params.class_weights;
  }
  // Balanced over the classes present; absent classes never reach a tree.
  const auto counts = train.class_counts();
  const auto present = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
  std::vector<double> weights(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) weights[c] = static_cast<double>(train.n()) / (present * static_cast<double>(counts[c]));
  }
  return weights;
}

}  // namespace

Forest fit_forest(const Dataset& train, const ForestParams& params, unsigned threads) {
  params.validate();
  if (train.has_missing()) throw MissingValues();
  const auto counts = train.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2) throw SingleClassInput();

  const auto weights = effective_class_weights(train, params);
  TreeOptions options;
  options.max_depth = params.max_depth;
  options.features_per_split = features_per_split(params.max_features, train.n_features());
  options.criterion = params.criterion;
  options.min_samples_leaf = params.min_samples_leaf;

  const std::size_t n = train.n();
  const auto n_trees = static_cast<std::size_t>(params.n_trees);
  std::vector<DecisionTree> trees(n_trees);
  std::vector<std::vector<std::uint32_t>> bootstrap(n_trees);
  parallel_for(n_trees, threads, [&](std::size_t t) {
    Rng rng = make_rng(params.seed, t);
    std::vector<std::uint32_t> counts_t(n, 0);
    for (std::size_t draw = 0; draw < n; ++draw) ++counts_t[uniform_index(rng, n)];
    trees[t] = grow_tree(train.features(), train.labels(), train.n_classes(), counts_t, weights, options, rng);
    bootstrap[t] = std::move(counts_t);
  });
  return Forest(params, train.schema(), train.class_names(), weights, std::move(trees), std::move(bootstrap));
}

LeafMatrix apply(const Forest& forest, const Dataset& d, unsigned threads) {
  forest.check_compatible(d);
  if (d.has_missing()) throw MissingValues();
  const std::size_t n_trees = forest.n_trees();
  LeafMatrix leaves(d.n(), n_trees);
  parallel_for(d.n(), threads, [&](std::size_t i) {
    const auto x = d.row(i);
    for (std::size_t t = 0; t < n_trees; ++t) leaves(i, t) = forest.trees()[t].leaf_of(x);
  });
  return leaves;
}

Matrix<double> predict_proba(const Forest& forest, const Dataset& d, unsigned threads) {
  const LeafMatrix leaves = apply(forest, d, threads);
  const std::size_t k = forest.n_classes();
  Matrix<double> proba(d.n(), k, 0.0);
  const auto n_trees = static_cast<double>(forest.n_trees());
  for (std::size_t i = 0; i < d.n(); ++i) {
    auto row = proba.row(i);
    for (std::size_t t = 0; t < forest.n_trees(); ++t) {
      const auto dist = forest.trees()[t].distribution(leaves(i, t));
      for (std::size_t c = 0; c < k; ++c) row[c] += dist[c];
    }
    for (double& v : row) v /= n_trees;
  }
  return proba;
}

std::vector<int> argmax_rows(const Matrix<double>& proba) {
  std::vector<int> out(proba.rows(), 0);
  for (std::size_t i = 0; i < proba.rows(); ++i) {
    const auto row = proba.row(i);
    // max_element returns the first maximum: ties go to the smaller id.
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<int> predict(const Forest& forest, const Dataset& d, unsigned threads) {
  return argmax_rows(predict_proba(forest, d, threads));
}

Matrix<std::uint8_t> oob_indicator(const Forest& forest) {
  Matrix<std::uint8_t> oob(forest.n_train(), forest.n_trees(), 0);
  for (std::size_t t = 0; t < forest.n_trees(); ++t) {
    const auto counts = forest.bootstrap_counts(t);
    for (std::size_t i = 0; i < counts.size(); ++i) oob(i, t) = counts[i] == 0 ? 1 : 0;
  }
  return oob;
}

}  // namespace rfprox
