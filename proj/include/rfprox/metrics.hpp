#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rfprox/matrix.hpp"

namespace rfprox {

struct ClassificationReport {
  double accuracy = 0.0;
  double f1_micro = 0.0;
  double f1_macro = 0.0;
  double f1_weighted = 0.0;  // support-weighted mean of per-class F1
  double auc_micro = 0.0;
  double auc_macro = 0.0;    // NaN when no class has both positives and negatives
  Matrix<std::size_t> confusion;  // rows: true class, columns: predicted class
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;
};

// K is proba.cols(). Labels must lie in [0, K). Rows of proba must be
// nonnegative and sum to 1 within 1e-6 (InvalidProbabilities otherwise).
// Macro averages run over the classes that occur in y_true or y_pred; a
// zero denominator in precision or recall counts as 0.
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           const Matrix<double>& proba);

// Area under the ROC curve with tied scores given their midpoint rank.
// NaN if there are no positives or no negatives.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// OLS of y on x with intercept. Constant y gives R^2 = 0.
RegressionResult linear_regression_r2(std::span<const double> x, std::span<const double> y);

struct BoxStats {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double whisker_low = 0.0;   // q1 - 1.5 IQR
  double whisker_high = 0.0;  // q3 + 1.5 IQR
  std::vector<double> outliers;  // values beyond the whiskers, ascending
};

// Quantile at p in [0, 1] of sorted values by linear interpolation between
// order statistics: position (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

BoxStats box_stats(std::span<const double> values);  // throws EmptyInput

}  // namespace rfprox
