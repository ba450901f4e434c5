#include "rfprox/data/dataset.hpp"

#include <algorithm>
#include <set>

#include "rfprox/errors.hpp"

namespace rfprox {

void FeatureSchema::validate() const {
  if (columns.empty()) throw InvalidSchema("schema has no feature columns");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name == label_column) throw InvalidSchema("label column '" + c.name + "' listed as a feature");
    if (!seen.insert(c.name).second) throw InvalidSchema("duplicate column '" + c.name + "'");
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

bool FeatureSchema::compatible_with(const FeatureSchema& other) const {
  return columns == other.columns;
}

Dataset::Dataset(FeatureSchema schema, Matrix<double> features, std::vector<int> labels,
                 std::vector<std::string> class_names, std::vector<std::size_t> ids)
    : schema_(std::move(schema)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)),
      ids_(std::move(ids)) {
  schema_.validate();
  if (features_.cols() != schema_.n_features()) {
    throw SchemaMismatch("feature matrix has " + std::to_string(features_.cols()) +
                         " columns, schema has " + std::to_string(schema_.n_features()));
  }
  if (labels_.size() != features_.rows()) throw LengthMismatch(labels_.size(), features_.rows());
  if (ids_.empty()) {
    ids_.resize(labels_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
  }
  if (ids_.size() != labels_.size()) throw LengthMismatch(ids_.size(), labels_.size());
  const int k = static_cast<int>(class_names_.size());
  for (int y : labels_) {
    if (y < 0 || y >= k) throw InvalidSchema("label id " + std::to_string(y) + " out of range");
  }
  for (std::size_t f = 0; f < schema_.columns.size(); ++f) {
    const auto& col = schema_.columns[f];
    if (col.kind != FeatureKind::categorical) continue;
    const auto vocab = static_cast<double>(col.vocabulary.size());
    for (std::size_t i = 0; i < features_.rows(); ++i) {
      const double v = features_(i, f);
      if (is_missing(v)) continue;
      if (v < 0 || v >= vocab || v != std::floor(v)) {
        throw InvalidSchema("categorical code out of vocabulary in column '" + col.name + "'");
      }
    }
  }
}

std::optional<int> Dataset::class_id(const std::string& name) const {
  const auto it = std::find(class_names_.begin(), class_names_.end(), name);
  if (it == class_names_.end()) return std::nullopt;
  return static_cast<int>(it - class_names_.begin());
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names_.size(), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

bool Dataset::has_missing() const {
  return std::any_of(features_.data().begin(), features_.data().end(), [](double v) { return is_missing(v); });
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix<double> features(rows.size(), n_features());
  std::vector<int> labels(rows.size());
  std::vector<std::size_t> ids(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    std::copy(features_.row(src).begin(), features_.row(src).end(), features.row(r).begin());
    labels[r] = labels_[src];
    ids[r] = ids_[src];
  }
  return Dataset(schema_, std::move(features), std::move(labels), class_names_, std::move(ids));
}

Dataset impute_zero(const Dataset& d) {
  FeatureSchema schema = d.schema();
  Matrix<double> features = d.features();
  for (std::size_t f = 0; f < schema.columns.size(); ++f) {
    auto& col = schema.columns[f];
    bool any_missing = false;
    for (std::size_t i = 0; i < features.rows(); ++i) any_missing |= is_missing(features(i, f));
    if (!any_missing) continue;
    double fill = 0.0;
    if (col.kind == FeatureKind::categorical) {
      auto it = std::find(col.vocabulary.begin(), col.vocabulary.end(), kMissingToken);
      if (it == col.vocabulary.end()) {
        col.vocabulary.emplace_back(kMissingToken);
        it = col.vocabulary.end() - 1;
      }
      fill = static_cast<double>(it - col.vocabulary.begin());
    }
    for (std::size_t i = 0; i < features.rows(); ++i) {
      if (is_missing(features(i, f))) features(i, f) = fill;
    }
  }
  return Dataset(std::move(schema), std::move(features), d.labels(), d.class_names(), d.ids());
}

}  // namespace rfprox
