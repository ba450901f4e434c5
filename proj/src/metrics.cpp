#include "rfprox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rfprox/errors.hpp"

namespace rfprox {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }
}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw LengthMismatch(scores.size(), positive.size());
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of positive ranks, ties averaged.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi + 1 < n && scores[order[hi + 1]] == scores[order[lo]]) ++hi;
    const double mid_rank = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0 + 1.0;
    for (std::size_t k = lo; k <= hi; ++k)
      if (positive[order[k]] != 0) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    lo = hi + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return kNaN;
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           const Matrix<double>& proba) {
  if (y_true.size() != y_pred.size()) throw LengthMismatch(y_true.size(), y_pred.size());
  if (proba.rows() != y_true.size()) throw LengthMismatch(y_true.size(), proba.rows());
  const std::size_t n = y_true.size();
  const std::size_t k = proba.cols();
  if (n == 0) throw EmptyInput();
  if (k < 2) throw InvalidProbabilities("need at least two probability columns");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double v : proba.row(i)) {
      if (!(v >= 0.0) || v > 1.0 + 1e-9) throw InvalidProbabilities("probability outside [0, 1] in row " + std::to_string(i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidProbabilities("row " + std::to_string(i) + " does not sum to 1");
    for (int l : {y_true[i], y_pred[i]})
      if (l < 0 || static_cast<std::size_t>(l) >= k) throw InvalidProbabilities("label outside the probability columns");
  }

  ClassificationReport r;
  r.confusion = Matrix<std::size_t>(k, k, 0);
  for (std::size_t i = 0; i < n; ++i) ++r.confusion(static_cast<std::size_t>(y_true[i]), static_cast<std::size_t>(y_pred[i]));

  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) correct += r.confusion(c, c);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  r.precision.assign(k, 0.0);
  r.recall.assign(k, 0.0);
  r.f1.assign(k, 0.0);
  r.support.assign(k, 0);
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0.0, weighted_sum = 0.0;
  std::size_t macro_count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t tp = r.confusion(c, c);
    std::size_t predicted = 0, actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += r.confusion(o, c);
      actual += r.confusion(c, o);
    }
    r.support[c] = actual;
    tp_all += tp;
    fp_all += predicted - tp;
    fn_all += actual - tp;
    r.precision[c] = safe_ratio(static_cast<double>(tp), static_cast<double>(predicted));
    r.recall[c] = safe_ratio(static_cast<double>(tp), static_cast<double>(actual));
    r.f1[c] = safe_ratio(2.0 * r.precision[c] * r.recall[c], r.precision[c] + r.recall[c]);
    if (predicted > 0 || actual > 0) {
      macro_sum += r.f1[c];
      ++macro_count;
    }
    weighted_sum += r.f1[c] * static_cast<double>(actual);
  }
  const double micro_p = safe_ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fp_all));
  const double micro_r = safe_ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fn_all));
  r.f1_micro = safe_ratio(2.0 * micro_p * micro_r, micro_p + micro_r);
  r.f1_macro = macro_sum / static_cast<double>(macro_count);
  r.f1_weighted = weighted_sum / static_cast<double>(n);

  std::vector<double> pooled_scores;
  std::vector<std::uint8_t> pooled_pos;
  pooled_scores.reserve(n * k);
  pooled_pos.reserve(n * k);
  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  std::vector<double> col(n);
  std::vector<std::uint8_t> pos(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = proba(i, c);
      pos[i] = static_cast<std::size_t>(y_true[i]) == c ? 1 : 0;
    }
    pooled_scores.insert(pooled_scores.end(), col.begin(), col.end());
    pooled_pos.insert(pooled_pos.end(), pos.begin(), pos.end());
    const double auc = roc_auc(col, pos);
    if (!std::isnan(auc)) {
      auc_sum += auc;
      ++auc_count;
    }
  }
  r.auc_micro = roc_auc(pooled_scores, pooled_pos);
  r.auc_macro = auc_count > 0 ? auc_sum / static_cast<double>(auc_count) : kNaN;
  return r;
}

RegressionResult linear_regression_r2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  const std::size_t n = x.size();
  if (n < 3) throw TooShort(n);
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConstantX();
  RegressionResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  if (!(syy > 0.0)) return r;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss_res += e * e;
  }
  r.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return r;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyInput();
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw EmptyInput();
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.n = v.size();
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  b.whisker_low = b.q1 - 1.5 * iqr;
  b.whisker_high = b.q3 + 1.5 * iqr;
  for (double x : v)
    if (x < b.whisker_low || x > b.whisker_high) b.outliers.push_back(x);
  return b;
}

}  // namespace rfprox
