#include "rfprox/forest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfprox/errors.hpp"

namespace rfprox {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, Matrix<double> leaf_distributions, int depth)
    : nodes_(std::move(nodes)), leaf_distributions_(std::move(leaf_distributions)), depth_(depth) {}

std::int32_t DecisionTree::leaf_of(std::span<const double> x) const {
  std::size_t node = 0;
  while (!nodes_[node].is_leaf()) {
    const auto& nd = nodes_[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return nodes_[node].leaf;
}

namespace {

double impurity(Criterion criterion, std::span<const double> class_weight, double total) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  if (criterion == Criterion::gini) {
    for (double w : class_weight) {
      const double p = w / total;
      acc += p * p;
    }
    return 1.0 - acc;
  }
  // entropy and log_loss share the same impurity.
  for (double w : class_weight) {
    if (w <= 0.0) continue;
    const double p = w / total;
    acc -= p * std::log2(p);
  }
  return acc;
}

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix<double>& x, std::span<const int> y, std::size_t k, std::vector<double> weight,
              const TreeOptions& opt, Rng& rng)
      : x_(x), y_(y), k_(k), weight_(std::move(weight)), opt_(opt), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    grow(0, samples_.size(), 0);
    const std::size_t n_leaves = leaf_values_.size() / k_;
    Matrix<double> leaves(n_leaves, k_, std::move(leaf_values_));
    return DecisionTree(std::move(nodes_), std::move(leaves), max_depth_seen_);
  }

 private:
  // Returns the index of the node created for samples_[begin, end).
  std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
    const auto node_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    max_depth_seen_ = std::max(max_depth_seen_, depth);

    std::vector<double> class_weight(k_, 0.0);
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t i = samples_[s];
      class_weight[static_cast<std::size_t>(y_[i])] += weight_[i];
    }
    const double total = std::accumulate(class_weight.begin(), class_weight.end(), 0.0);
    const std::size_t n_node = end - begin;
    const auto populated = std::count_if(class_weight.begin(), class_weight.end(), [](double w) { return w > 0.0; });

    const bool stop = populated <= 1 || (opt_.max_depth && depth >= *opt_.max_depth) ||
                      n_node < 2 * static_cast<std::size_t>(opt_.min_samples_leaf);
    Split split;
    if (!stop) split = best_split(begin, end, class_weight, total);
    if (split.feature < 0) {
      make_leaf(node_id, class_weight, total);
      return node_id;
    }

    const auto f = static_cast<std::size_t>(split.feature);
    const auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::size_t i) { return x_(i, f) <= split.threshold; });
    const auto middle = static_cast<std::size_t>(mid - samples_.begin());
    const std::int32_t left = grow(begin, middle, depth + 1);
    const std::int32_t right = grow(middle, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(node_id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
  }

  void make_leaf(std::int32_t node_id, const std::vector<double>& class_weight, double total) {
    nodes_[static_cast<std::size_t>(node_id)].leaf = static_cast<std::int32_t>(leaf_values_.size() / k_);
    for (double w : class_weight) leaf_values_.push_back(w / total);
  }

  Split best_split(std::size_t begin, std::size_t end, const std::vector<double>& class_weight, double total) {
    const double parent = impurity(opt_.criterion, class_weight, total);
    const std::size_t p = x_.cols();
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);

    Split best;
    std::size_t examined = 0;
    std::size_t remaining = p;
    std::vector<std::pair<double, std::size_t>> column;
    column.reserve(end - begin);
    std::vector<double> left(k_);
    std::vector<double> right(k_);
    const auto min_leaf = static_cast<std::size_t>(opt_.min_samples_leaf);

    while (examined < opt_.features_per_split && remaining > 0) {
      // Partial Fisher-Yates: draw the next candidate among those not yet seen.
      const std::size_t pick = uniform_index(rng_, remaining);
      std::swap(order[pick], order[remaining - 1]);
      const std::size_t f = order[--remaining];

      column.clear();
      for (std::size_t s = begin; s < end; ++s) column.emplace_back(x_(samples_[s], f), samples_[s]);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;  // constant here, not counted
      ++examined;

      std::fill(left.begin(), left.end(), 0.0);
      double left_total = 0.0;
      const std::size_t n = column.size();
      for (std::size_t pos = 1; pos < n; ++pos) {
        const std::size_t prev = column[pos - 1].second;
        left[static_cast<std::size_t>(y_[prev])] += weight_[prev];
        left_total += weight_[prev];
        if (column[pos].first == column[pos - 1].first) continue;
        if (pos < min_leaf || n - pos < min_leaf) continue;
        for (std::size_t c = 0; c < k_; ++c) right[c] = class_weight[c] - left[c];
        const double right_total = total - left_total;
        const double gain = parent * total - left_total * impurity(opt_.criterion, left, left_total) -
                            right_total * impurity(opt_.criterion, right, right_total);
        double threshold = 0.5 * (column[pos - 1].first + column[pos].first);
        if (threshold >= column[pos].first) threshold = column[pos - 1].first;
        if (better(gain, static_cast<std::int32_t>(f), threshold, best)) {
          best = Split{static_cast<std::int32_t>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  // Larger gain wins; near-equal gains go to the lower feature index, then
  // the lower threshold.
  static bool better(double gain, std::int32_t feature, double threshold, const Split& best) {
    if (best.feature < 0) return true;
    constexpr double kTie = 1e-12;
    if (gain > best.gain + kTie) return true;
    if (gain < best.gain - kTie) return false;
    if (feature != best.feature) return feature < best.feature;
    return threshold < best.threshold;
  }

  const Matrix<double>& x_;
  std::span<const int> y_;
  std::size_t k_;
  std::vector<double> weight_;
  const TreeOptions& opt_;
  Rng& rng_;

  std::vector<std::size_t> samples_;
  std::vector<TreeNode> nodes_;
  std::vector<double> leaf_values_;
  int max_depth_seen_ = 0;
};

}  // namespace

DecisionTree grow_tree(const Matrix<double>& features, std::span<const int> labels, std::size_t n_classes,
                       std::span<const std::uint32_t> multiplicity, std::span<const double> class_weights,
                       const TreeOptions& options, Rng& rng) {
  const std::size_t n = features.rows();
  if (labels.size() != n) throw LengthMismatch(labels.size(), n);
  if (multiplicity.size() != n) throw LengthMismatch(multiplicity.size(), n);
  if (class_weights.size() != n_classes) throw LengthMismatch(class_weights.size(), n_classes);
  if (options.features_per_split < 1) throw InvalidParams("features_per_split must be at least 1");

  std::vector<double> weight(n, 0.0);
  std::vector<std::size_t> samples;
  for (std::size_t i = 0; i < n; ++i) {
    if (multiplicity[i] == 0) continue;
    weight[i] = static_cast<double>(multiplicity[i]) * class_weights[static_cast<std::size_t>(labels[i])];
    if (weight[i] > 0.0) samples.push_back(i);
  }
  if (samples.empty()) throw InvalidParams("tree has no weighted samples");
  TreeBuilder builder(features, labels, n_classes, std::move(weight), options, rng);
  return builder.build(std::move(samples));
}

}  // namespace rfprox
