#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfprox/matrix.hpp"

namespace rfprox {

enum class FeatureKind { numeric, categorical };

inline constexpr const char* kMissingToken = "__MISSING__";

// Missing cells are stored as NaN in the feature matrix.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Categorical only: code c in the feature matrix means vocabulary[c]. Left
  // empty in a schema handed to load_csv, the loader fills it from the file.
  std::vector<std::string> vocabulary;

  bool operator==(const Column&) const = default;
};

struct FeatureSchema {
  std::vector<Column> columns;
  std::string label_column;

  // Throws InvalidSchema on duplicate names, a label among the features, or
  // no feature columns.
  void validate() const;
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t n_features() const { return columns.size(); }

  // Same names, kinds and vocabularies in the same order.
  bool compatible_with(const FeatureSchema& other) const;

  bool operator==(const FeatureSchema&) const = default;
};

// Immutable table of feature rows and class labels. Every record keeps the id
// it had in the file it came from, so subsets and splits stay traceable.
class Dataset {
 public:
  Dataset() = default;
  Dataset(FeatureSchema schema, Matrix<double> features, std::vector<int> labels,
          std::vector<std::string> class_names, std::vector<std::size_t> ids = {});

  const FeatureSchema& schema() const { return schema_; }
  const Matrix<double>& features() const { return features_; }
  std::size_t n() const { return features_.rows(); }
  std::size_t n_features() const { return features_.cols(); }
  std::size_t n_classes() const { return class_names_.size(); }

  std::span<const double> row(std::size_t i) const { return features_.row(i); }
  double at(std::size_t i, std::size_t f) const { return features_(i, f); }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::size_t>& ids() const { return ids_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::string& class_name(int c) const { return class_names_[static_cast<std::size_t>(c)]; }
  std::optional<int> class_id(const std::string& name) const;

  // n_J for J = 0..K-1.
  std::vector<std::size_t> class_counts() const;
  bool has_missing() const;

  // Rows in the given order; schema, classes and record ids carry over.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  FeatureSchema schema_;
  Matrix<double> features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<std::size_t> ids_;
};

// Missing numeric cells become 0; missing categorical cells become the
// reserved "__MISSING__" category (appended to the vocabulary if absent).
Dataset impute_zero(const Dataset& d);

}  // namespace rfprox
