#include "rfprox/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rfprox/errors.hpp"
#include "rfprox/parallel.hpp"

namespace rfprox {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t class_size(std::span<const int> labels, int J) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), J));
}

void check_labels(const ProximityMatrix& p, std::span<const int> labels) {
  if (labels.size() != p.n()) throw LengthMismatch(labels.size(), p.n());
}

// Median of a nonempty vector; reorders it.
double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

// P^J(i) for all records and classes, one row per record.
Matrix<double> all_class_sums(const ProximityMatrix& p, std::span<const int> labels, std::size_t k,
                              unsigned threads) {
  const std::size_t n = p.n();
  Matrix<double> sums(n, k);
  parallel_for(n, threads, [&](std::size_t i) {
    auto row = sums.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = p(i, j);
      row[static_cast<std::size_t>(labels[j])] += v * v;
    }
  });
  return sums;
}

double raw_from(double n_j, double avg) { return avg > 0.0 ? n_j / avg : kInf; }

}  // namespace

std::string to_string(DeviationKind k) {
  return k == DeviationKind::median_absolute ? "median_absolute" : "mean_absolute";
}

std::string to_string(ThresholdAnchor a) { return a == ThresholdAnchor::mean ? "mean" : "zero"; }

DeviationKind parse_deviation_kind(const std::string& text) {
  if (text == "median_absolute" || text == "mad") return DeviationKind::median_absolute;
  if (text == "mean_absolute") return DeviationKind::mean_absolute;
  throw InvalidParams("unknown deviation kind '" + text + "'");
}

ThresholdAnchor parse_threshold_anchor(const std::string& text) {
  if (text == "mean") return ThresholdAnchor::mean;
  if (text == "zero") return ThresholdAnchor::zero;
  throw InvalidParams("unknown threshold anchor '" + text + "'");
}

double class_average_proximity(const ProximityMatrix& p, std::span<const int> labels, std::size_t i, int J) {
  check_labels(p, labels);
  const std::size_t n_j = class_size(labels, J);
  if (n_j == 0) throw EmptyClass(J);
  if (labels[i] == J && n_j == 1) throw SingletonOwnClass(J);
  double sum = 0.0;
  for (std::size_t j = 0; j < p.n(); ++j) {
    if (j == i || labels[j] != J) continue;
    const double v = p(i, j);
    sum += v * v;
  }
  return sum;
}

std::vector<double> raw_outlier(const ProximityMatrix& p, std::span<const int> labels, int J) {
  check_labels(p, labels);
  const std::size_t n_j = class_size(labels, J);
  if (n_j == 0) throw EmptyClass(J);
  std::vector<double> raw(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < p.n(); ++j) {
      if (j == i || labels[j] != J) continue;
      const double v = p(i, j);
      sum += v * v;
    }
    raw[i] = raw_from(static_cast<double>(n_j), sum);
  }
  return raw;
}

CenterSpread center_spread(std::vector<double> sample, DeviationKind kind) {
  std::erase_if(sample, [](double v) { return !std::isfinite(v); });
  if (sample.empty()) return {};
  CenterSpread cs;
  cs.median = median_of(sample);
  for (double& v : sample) v = std::abs(v - cs.median);
  if (kind == DeviationKind::median_absolute) {
    cs.deviation = median_of(sample);
  } else {
    cs.deviation = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
  }
  return cs;
}

double standardize(double raw, const CenterSpread& cs, bool in_class) {
  if (std::isinf(raw)) return kInf;
  if (cs.deviation < kDevEpsilon) {
    if (in_class || raw == cs.median) return 0.0;
    return raw > cs.median ? kInf : -kInf;
  }
  return (raw - cs.median) / cs.deviation;
}

namespace {

// Standardizes column J of `raw` for every record.
void measure_column(const Matrix<double>& raw, std::span<const int> labels, int J, DeviationKind kind,
                    Matrix<double>& out, CenterSpread& own, unsigned threads) {
  const std::size_t n = raw.rows();
  const auto col = static_cast<std::size_t>(J);
  std::vector<double> members;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] == J) members.push_back(raw(i, col));
  own = center_spread(members, kind);
  parallel_for(n, threads, [&](std::size_t i) {
    if (labels[i] == J) {
      out(i, col) = standardize(raw(i, col), own, true);
      return;
    }
    std::vector<double> sample = members;
    sample.push_back(raw(i, col));
    out(i, col) = standardize(raw(i, col), center_spread(std::move(sample), kind), false);
  });
}

void check_class_sizes(std::span<const int> labels, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw InvalidParams("label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw EmptyClass(static_cast<int>(c));
    if (counts[c] == 1) throw ClassTooSmall(static_cast<int>(c));
  }
}

}  // namespace

std::vector<double> outlier_measure(const ProximityMatrix& p, std::span<const int> labels, int J,
                                    DeviationKind deviation) {
  check_labels(p, labels);
  const std::size_t n_j = class_size(labels, J);
  if (n_j == 0) throw EmptyClass(J);
  if (n_j == 1) throw ClassTooSmall(J);
  const auto raw_j = raw_outlier(p, labels, J);
  Matrix<double> raw(p.n(), 1, raw_j);
  std::vector<int> relabeled(labels.begin(), labels.end());
  for (int& l : relabeled) l = (l == J) ? 0 : -1;
  Matrix<double> out(p.n(), 1);
  CenterSpread cs;
  measure_column(raw, relabeled, 0, deviation, out, cs, 1);
  return out.data();
}

OutlierScores compute_outlier_scores(const ProximityMatrix& p, std::span<const int> labels, std::size_t n_classes,
                                     const OutlierOptions& options, unsigned threads) {
  check_labels(p, labels);
  check_class_sizes(labels, n_classes);
  OutlierScores s;
  s.n = p.n();
  s.n_classes = n_classes;
  s.labels.assign(labels.begin(), labels.end());
  s.options = options;
  s.avg_prox = all_class_sums(p, labels, n_classes, threads);
  s.raw = Matrix<double>(s.n, n_classes);
  std::vector<double> counts(n_classes, 0.0);
  for (int l : labels) counts[static_cast<std::size_t>(l)] += 1.0;
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t c = 0; c < n_classes; ++c) s.raw(i, c) = raw_from(counts[c], s.avg_prox(i, c));
  s.measure = Matrix<double>(s.n, n_classes);
  s.median.resize(n_classes);
  s.deviation.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    CenterSpread cs;
    measure_column(s.raw, labels, static_cast<int>(c), options.deviation, s.measure, cs, threads);
    s.median[c] = cs.median;
    s.deviation[c] = cs.deviation;
  }
  s.threshold = class_thresholds(s, options.k_sigma, options.anchor);
  return s;
}

std::vector<double> class_thresholds(const OutlierScores& scores, double k_sigma, ThresholdAnchor anchor) {
  std::vector<double> thresholds(scores.n_classes, 0.0);
  for (std::size_t c = 0; c < scores.n_classes; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < scores.n; ++i) {
      const double o = scores.measure(i, c);
      if (static_cast<std::size_t>(scores.labels[i]) != c || !std::isfinite(o)) continue;
      sum += o;
      ++count;
    }
    if (std::isinf(k_sigma) && k_sigma > 0) {
      thresholds[c] = kInf;
      continue;
    }
    const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < scores.n; ++i) {
      const double o = scores.measure(i, c);
      if (static_cast<std::size_t>(scores.labels[i]) != c || !std::isfinite(o)) continue;
      ss += (o - mean) * (o - mean);
    }
    const double sd = count > 0 ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
    thresholds[c] = (anchor == ThresholdAnchor::mean ? mean : 0.0) + k_sigma * sd;
  }
  return thresholds;
}

std::vector<std::uint8_t> within_class_outliers(const OutlierScores& scores, double k_sigma, ThresholdAnchor anchor) {
  const auto thresholds = class_thresholds(scores, k_sigma, anchor);
  std::vector<std::uint8_t> flags(scores.n, 0);
  for (std::size_t i = 0; i < scores.n; ++i)
    flags[i] = scores.own(i) > thresholds[static_cast<std::size_t>(scores.labels[i])] ? 1 : 0;
  return flags;
}

std::vector<double> cross_class_profile(const ProximityMatrix& p, std::span<const int> labels, std::size_t i,
                                        DeviationKind deviation) {
  check_labels(p, labels);
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  check_class_sizes(labels, static_cast<std::size_t>(k));
  std::vector<double> profile(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) profile[static_cast<std::size_t>(c)] = outlier_measure(p, labels, c, deviation)[i];
  return profile;
}

std::vector<double> cross_class_profile(const OutlierScores& scores, std::size_t i) {
  auto row = scores.measure.row(i);
  return {row.begin(), row.end()};
}

bool is_novelty(const OutlierScores& scores, std::size_t i) {
  for (std::size_t c = 0; c < scores.n_classes; ++c)
    if (!(scores.measure(i, c) > scores.threshold[c])) return false;
  return true;
}

QuartileAssignment quartile_assignment(const OutlierScores& scores, std::span<const std::size_t> ids) {
  QuartileAssignment qa;
  qa.quartile.assign(scores.n, 1);
  qa.small_class.assign(scores.n_classes, 0);
  const auto id_of = [&](std::size_t i) { return ids.empty() ? i : ids[i]; };
  for (std::size_t c = 0; c < scores.n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < scores.n; ++i)
      if (static_cast<std::size_t>(scores.labels[i]) == c) members.push_back(i);
    if (members.size() < 4) {
      qa.small_class[c] = 1;
      continue;
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const double oa = scores.own(a);
      const double ob = scores.own(b);
      if (oa != ob) return oa < ob;
      return id_of(a) < id_of(b);
    });
    const std::size_t m = members.size();
    for (std::size_t r = 0; r < m; ++r) qa.quartile[members[r]] = static_cast<int>(r * 4 / m) + 1;
  }
  return qa;
}

}  // namespace rfprox
