#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfprox/matrix.hpp"
#include "rfprox/proximity.hpp"

namespace rfprox {

// Spread used to standardize raw measures: median or mean of |raw - median|.
enum class DeviationKind { median_absolute, mean_absolute };
// Flag threshold is anchor + k_sigma * std of the in-class measures.
enum class ThresholdAnchor { mean, zero };

std::string to_string(DeviationKind k);
std::string to_string(ThresholdAnchor a);
DeviationKind parse_deviation_kind(const std::string& text);  // throws InvalidParams
ThresholdAnchor parse_threshold_anchor(const std::string& text);

inline constexpr double kDevEpsilon = 1e-12;

struct OutlierOptions {
  DeviationKind deviation = DeviationKind::median_absolute;
  ThresholdAnchor anchor = ThresholdAnchor::mean;
  double k_sigma = 2.0;
};

// Sum of Prox(i, j)^2 over members j of class J, skipping i itself.
// Throws EmptyClass if J has no members, SingletonOwnClass if i is J's only member.
double class_average_proximity(const ProximityMatrix& p, std::span<const int> labels, std::size_t i, int J);

// n_J / P^J(i) for every record; +inf where P^J(i) = 0.
std::vector<double> raw_outlier(const ProximityMatrix& p, std::span<const int> labels, int J);

struct CenterSpread {
  double median = 0.0;
  double deviation = 0.0;
};

// Median and deviation of the finite values in `sample`.
CenterSpread center_spread(std::vector<double> sample, DeviationKind kind);

// (raw - median) / deviation with the degenerate-spread rules applied.
// `in_class` selects the rule for deviation < kDevEpsilon: in-class records
// get 0, others get 0 at the median and +-inf elsewhere.
double standardize(double raw, const CenterSpread& cs, bool in_class);

// O^J(i) for every record. In-class records are standardized against the
// class's own raw measures; a record from another class is standardized
// against the class's raw measures plus its own. Throws EmptyClass, or
// ClassTooSmall when J has a single member.
std::vector<double> outlier_measure(const ProximityMatrix& p, std::span<const int> labels, int J,
                                    DeviationKind deviation = DeviationKind::median_absolute);

struct OutlierScores {
  std::size_t n = 0;
  std::size_t n_classes = 0;
  std::vector<int> labels;
  OutlierOptions options;
  Matrix<double> avg_prox;  // n x K, P^J(i)
  Matrix<double> raw;       // n x K
  Matrix<double> measure;   // n x K, O^J(i)
  std::vector<double> median;     // per class, over in-class raw measures
  std::vector<double> deviation;  // per class
  std::vector<double> threshold;  // per class flag threshold

  double own(std::size_t i) const { return measure(i, static_cast<std::size_t>(labels[i])); }
};

// Every record against every class. Classes with fewer than two members are
// rejected (ClassTooSmall / EmptyClass).
OutlierScores compute_outlier_scores(const ProximityMatrix& p, std::span<const int> labels, std::size_t n_classes,
                                     const OutlierOptions& options = {}, unsigned threads = 0);

// Per-class anchor + k_sigma * std (population) of the finite in-class O values.
std::vector<double> class_thresholds(const OutlierScores& scores, double k_sigma,
                                     ThresholdAnchor anchor = ThresholdAnchor::mean);

// O^{own}(i) > own class threshold; infinite measures are flagged unless the
// threshold is itself infinite.
std::vector<std::uint8_t> within_class_outliers(const OutlierScores& scores, double k_sigma = 2.0,
                                                ThresholdAnchor anchor = ThresholdAnchor::mean);

// O^J(i) for every class J.
std::vector<double> cross_class_profile(const ProximityMatrix& p, std::span<const int> labels, std::size_t i,
                                        DeviationKind deviation = DeviationKind::median_absolute);
std::vector<double> cross_class_profile(const OutlierScores& scores, std::size_t i);

// Exceeds the threshold of every class, its own included.
bool is_novelty(const OutlierScores& scores, std::size_t i);

struct QuartileAssignment {
  std::vector<int> quartile;               // 1..4 per record
  std::vector<std::uint8_t> small_class;   // per class: fewer than 4 members, all put in quartile 1
};

// Ranks each class by own-class O ascending (ties by id; ids default to row
// positions) and cuts the ranks into four near-equal groups.
QuartileAssignment quartile_assignment(const OutlierScores& scores, std::span<const std::size_t> ids = {});

}  // namespace rfprox
