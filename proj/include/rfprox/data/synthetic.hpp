#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rfprox/data/dataset.hpp"
#include "rfprox/matrix.hpp"

namespace rfprox {

// Category-structured stand-in for a fund universe: numeric "allocation"
// features clustered around one center per class, a few categorical
// features with a class-preferred value, and a return panel whose fit to the
// class benchmark decays with the record's distance from its class center.
struct SyntheticSpec {
  int n_classes = 3;
  int records_per_class = 200;
  int numeric_dims = 6;  // must be >= n_classes
  std::vector<int> categorical_vocab_sizes{4, 3};
  double class_separation = 5.0;       // pairwise distance between class centers
  double within_spread = 1.0;          // per-dimension std of records around a center
  double contamination_fraction = 0.1; // share of each class drawn from another class
  double category_fidelity = 0.8;      // chance a record takes its center's preferred category
  // Beta to the class benchmark runs from beta_max at the center down to
  // beta_min far from it; idiosyncratic noise grows with the same distance.
  double beta_min = 0.3;
  double beta_max = 1.0;
  double noise_base = 0.002;
  double noise_growth = 1.0;
  double benchmark_mean = 0.008;
  double benchmark_vol = 0.04;
  int horizon = 36;  // return periods
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidSpec
};

struct SyntheticData {
  Dataset dataset;
  Matrix<double> returns;     // n x horizon, row i belongs to dataset record i
  Matrix<double> benchmarks;  // n_classes x horizon
  std::vector<bool> is_injected;
  std::vector<int> source_class;        // class whose center generated the record
  std::vector<double> center_distance;  // numeric distance to the labeled class center
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// <dir>/dataset.csv, returns.csv (record_id,period,return),
// benchmarks.csv (label,period,return), truth.csv (record_id,is_injected).
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

}  // namespace rfprox
