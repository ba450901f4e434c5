#include "rfprox/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfprox/errors.hpp"
#include "rfprox/rng.hpp"

namespace rfprox {

namespace {

// Row positions of each class, ordered by record id and then shuffled with a
// per-class stream.
std::vector<std::vector<std::size_t>> shuffled_members(const Dataset& d, std::uint64_t seed,
                                                       std::uint64_t stream_base) {
  std::vector<std::vector<std::size_t>> members(d.n_classes());
  for (std::size_t i = 0; i < d.n(); ++i) members[static_cast<std::size_t>(d.label(i))].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return d.id(a) < d.id(b); });
    Rng rng = make_rng(seed, stream_base + c);
    shuffle_range(m.begin(), m.end(), rng);
  }
  return members;
}

}  // namespace

TrainTestSplit stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidParams("test_fraction must lie in (0, 1)");
  }
  const auto counts = d.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 1) throw ClassTooSmall(static_cast<int>(c));
  }

  // Largest-remainder apportionment of the overall test size.
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(d.n()) * test_fraction));
  std::vector<std::size_t> take(counts.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double ideal = static_cast<double>(counts[c]) * test_fraction;
    take[c] = static_cast<std::size_t>(std::floor(ideal));
    assigned += take[c];
    if (counts[c] > 0) remainders.emplace_back(ideal - std::floor(ideal), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; r < remainders.size() && assigned < total; ++r, ++assigned) {
    ++take[remainders[r].second];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    take[c] = std::clamp<std::size_t>(take[c], 1, counts[c] - 1);
  }

  const auto members = shuffled_members(d, seed, 0);
  std::vector<bool> in_test(d.n(), false);
  for (std::size_t c = 0; c < members.size(); ++c) {
    for (std::size_t r = 0; r < take[c]; ++r) in_test[members[c][r]] = true;
  }
  TrainTestSplit out;
  for (std::size_t i = 0; i < d.n(); ++i) (in_test[i] ? out.test_rows : out.train_rows).push_back(i);
  out.train = d.subset(out.train_rows);
  out.test = d.subset(out.test_rows);
  return out;
}

std::vector<std::size_t> FoldPlan::rows_in(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::rows_not_in(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan stratified_kfold(const Dataset& d, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidParams("k must be at least 2");
  const auto counts = d.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0 && counts[c] < static_cast<std::size_t>(k)) {
      throw ClassSmallerThanK(static_cast<int>(c), k);
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(d.n(), -1);
  // Deal members round-robin; the dealer position carries over between
  // classes so fold sizes also stay within one of each other.
  std::size_t dealer = 0;
  for (const auto& m : shuffled_members(d, seed, 1u << 20)) {
    for (std::size_t row : m) plan.assignments[row] = static_cast<int>(dealer++ % static_cast<std::size_t>(k));
  }
  return plan;
}

std::vector<double> balanced_class_weights(std::span<const int> labels, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw InvalidParams("label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  std::vector<double> weights(counts.size());
  const auto n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw AbsentClass(static_cast<int>(c));
    weights[c] = n / (static_cast<double>(n_classes) * static_cast<double>(counts[c]));
  }
  return weights;
}

}  // namespace rfprox
