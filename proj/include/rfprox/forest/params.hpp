#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rfprox {

enum class MaxFeatures { sqrt, log2, all };
enum class Criterion { gini, entropy, log_loss };

std::string to_string(MaxFeatures m);
std::string to_string(Criterion c);
MaxFeatures parse_max_features(const std::string& text);  // throws InvalidParams
Criterion parse_criterion(const std::string& text);

// Features examined per split: ceil(sqrt(p)), ceil(log2(p)) or p, at least 1.
std::size_t features_per_split(MaxFeatures m, std::size_t n_features);

struct ForestParams {
  int n_trees = 100;
  std::optional<int> max_depth;  // nullopt grows until leaves are pure
  MaxFeatures max_features = MaxFeatures::sqrt;
  Criterion criterion = Criterion::gini;
  int min_samples_leaf = 1;
  // Empty means balanced weights computed from the training labels.
  std::vector<double> class_weights;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidParams

  bool operator==(const ForestParams&) const = default;
};

}  // namespace rfprox
