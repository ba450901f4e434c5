#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rfprox/forest/params.hpp"
#include "rfprox/matrix.hpp"
#include "rfprox/rng.hpp"

namespace rfprox {

struct TreeNode {
  // Internal nodes: route x[feature] <= threshold to `left`, else `right`.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaves: index into the tree's leaf table, contiguous from 0.
  std::int32_t leaf = -1;

  bool is_leaf() const { return leaf >= 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, Matrix<double> leaf_distributions, int depth);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_leaves() const { return leaf_distributions_.rows(); }
  std::size_t n_classes() const { return leaf_distributions_.cols(); }
  int depth() const { return depth_; }

  // Leaf id reached by feature row x.
  std::int32_t leaf_of(std::span<const double> x) const;
  // Weighted class distribution of a leaf; sums to 1.
  std::span<const double> distribution(std::int32_t leaf) const {
    return leaf_distributions_.row(static_cast<std::size_t>(leaf));
  }
  const Matrix<double>& leaf_distributions() const { return leaf_distributions_; }

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  Matrix<double> leaf_distributions_;
  int depth_ = 0;
};

struct TreeOptions {
  std::optional<int> max_depth;
  std::size_t features_per_split = 1;
  Criterion criterion = Criterion::gini;
  int min_samples_leaf = 1;
};

// Grows one CART classification tree on the records with nonzero
// `multiplicity`. A record's weight is multiplicity * class_weights[label].
// Splits are exhaustive over midpoints between consecutive distinct values of
// each candidate feature; candidates are drawn without replacement at every
// node and constant features do not count toward features_per_split.
DecisionTree grow_tree(const Matrix<double>& features, std::span<const int> labels, std::size_t n_classes,
                       std::span<const std::uint32_t> multiplicity, std::span<const double> class_weights,
                       const TreeOptions& options, Rng& rng);

}  // namespace rfprox
