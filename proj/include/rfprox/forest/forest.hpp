#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfprox/data/dataset.hpp"
#include "rfprox/forest/params.hpp"
#include "rfprox/forest/tree.hpp"
#include "rfprox/matrix.hpp"

namespace rfprox {

// n x T leaf ids: entry (i, t) is the leaf of tree t that record i reaches.
using LeafMatrix = Matrix<std::int32_t>;

class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, FeatureSchema schema, std::vector<std::string> class_names,
         std::vector<double> class_weights, std::vector<DecisionTree> trees,
         std::vector<std::vector<std::uint32_t>> bootstrap_counts);

  const ForestParams& params() const { return params_; }
  const FeatureSchema& schema() const { return schema_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t n_classes() const { return class_names_.size(); }
  const std::vector<double>& class_weights() const { return class_weights_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_trees() const { return trees_.size(); }
  // Training-set size; bootstrap bookkeeping refers to those row positions.
  std::size_t n_train() const { return n_train_; }
  // In-bag multiplicity of each training row for tree t (the bootstrap multiset).
  std::span<const std::uint32_t> bootstrap_counts(std::size_t t) const { return bootstrap_counts_[t]; }
  const std::vector<std::vector<std::uint32_t>>& all_bootstrap_counts() const { return bootstrap_counts_; }

  // Throws SchemaMismatch unless d has this forest's features and classes.
  void check_compatible(const Dataset& d) const;

  bool operator==(const Forest&) const = default;

 private:
  ForestParams params_;
  FeatureSchema schema_;
  std::vector<std::string> class_names_;
  std::vector<double> class_weights_;
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<std::uint32_t>> bootstrap_counts_;
  std::size_t n_train_ = 0;
};

// Trains T trees, each on its own bootstrap sample of n records drawn with
// replacement. Tree t draws everything from stream (params.seed, t), so the
// result does not depend on `threads` (0 = hardware concurrency).
Forest fit_forest(const Dataset& train, const ForestParams& params, unsigned threads = 0);

LeafMatrix apply(const Forest& forest, const Dataset& d, unsigned threads = 0);

// Row-stochastic n x K matrix: mean of leaf distributions over trees.
Matrix<double> predict_proba(const Forest& forest, const Dataset& d, unsigned threads = 0);

// Argmax per row; ties go to the smaller class id.
std::vector<int> argmax_rows(const Matrix<double>& proba);
std::vector<int> predict(const Forest& forest, const Dataset& d, unsigned threads = 0);

// n_train x T: true where the training row was not drawn for tree t.
Matrix<std::uint8_t> oob_indicator(const Forest& forest);

}  // namespace rfprox
