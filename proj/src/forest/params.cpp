#include "rfprox/forest/params.hpp"

#include <cmath>

#include "rfprox/errors.hpp"

namespace rfprox {

std::string to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::sqrt: return "sqrt";
    case MaxFeatures::log2: return "log2";
    case MaxFeatures::all: return "all";
  }
  return "?";
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::gini: return "gini";
    case Criterion::entropy: return "entropy";
    case Criterion::log_loss: return "log_loss";
  }
  return "?";
}

MaxFeatures parse_max_features(const std::string& text) {
  if (text == "sqrt") return MaxFeatures::sqrt;
  if (text == "log2") return MaxFeatures::log2;
  if (text == "all") return MaxFeatures::all;
  throw InvalidParams("unknown max_features '" + text + "'");
}

Criterion parse_criterion(const std::string& text) {
  if (text == "gini") return Criterion::gini;
  if (text == "entropy") return Criterion::entropy;
  if (text == "log_loss") return Criterion::log_loss;
  throw InvalidParams("unknown criterion '" + text + "'");
}

std::size_t features_per_split(MaxFeatures m, std::size_t n_features) {
  const double p = static_cast<double>(n_features);
  std::size_t k = n_features;
  switch (m) {
    case MaxFeatures::sqrt: k = static_cast<std::size_t>(std::ceil(std::sqrt(p))); break;
    case MaxFeatures::log2: k = static_cast<std::size_t>(std::ceil(std::log2(p))); break;
    case MaxFeatures::all: break;
  }
  if (k < 1) k = 1;
  if (k > n_features) k = n_features;
  return k;
}

void ForestParams::validate() const {
  if (n_trees < 1) throw InvalidParams("n_trees must be at least 1");
  if (max_depth && *max_depth < 1) throw InvalidParams("max_depth must be at least 1");
  if (min_samples_leaf < 1) throw InvalidParams("min_samples_leaf must be at least 1");
  for (double w : class_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidParams("class weights must be positive");
  }
}

}  // namespace rfprox
