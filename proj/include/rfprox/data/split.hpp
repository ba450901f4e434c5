#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rfprox/data/dataset.hpp"

namespace rfprox {

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // row positions in the input dataset
  std::vector<std::size_t> test_rows;
};

// Per-class test counts by largest-remainder apportionment of
// round(n * test_fraction) over the classes, clamped so every class keeps at
// least one record on each side. Members are ordered by record id before the
// seeded shuffle, so the partition depends on identities, not row order.
TrainTestSplit stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold id per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> rows_in(int fold) const;
  std::vector<std::size_t> rows_not_in(int fold) const;
};

FoldPlan stratified_kfold(const Dataset& d, int k, std::uint64_t seed);

// n / (K * n_J) per class.
std::vector<double> balanced_class_weights(std::span<const int> labels, int n_classes);

}  // namespace rfprox
