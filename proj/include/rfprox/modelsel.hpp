#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rfprox/data/dataset.hpp"
#include "rfprox/data/split.hpp"
#include "rfprox/forest/params.hpp"

namespace rfprox {

struct Grid {
  std::vector<int> n_trees;
  std::vector<std::optional<int>> max_depth;  // nullopt = unbounded
  std::vector<MaxFeatures> max_features;
  std::vector<Criterion> criterion;

  // 100..1000 trees step 100; depth 5..50 step 5 plus unbounded; sqrt and
  // log2; all three criteria.
  static Grid table3();

  std::size_t size() const;
  void validate() const;  // throws InvalidParams on an empty axis

  // Every combination, n_trees outermost and criterion innermost. Fields not
  // on the grid come from `base`.
  std::vector<ForestParams> expand(const ForestParams& base = {}) const;
};

// Every ceil(size / budget)-th config starting from the first; all of them
// when budget is 0 or at least the list size.
std::vector<ForestParams> stride_subsample(const std::vector<ForestParams>& configs, std::size_t budget);

enum class Scoring { accuracy, f1_macro };
std::string to_string(Scoring s);
Scoring parse_scoring(const std::string& text);  // throws InvalidParams

struct ConfigResult {
  ForestParams params;
  std::vector<double> fold_scores;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
};

struct CVResult {
  std::vector<ConfigResult> table;  // in input order
  std::size_t best = 0;
  Scoring scoring = Scoring::accuracy;
  int k = 5;
  std::uint64_t fold_seed = 0;

  const ForestParams& best_config() const { return table[best].params; }
};

// Highest mean wins; ties go to fewer trees, then smaller max_depth
// (unbounded counts as deepest), then the earlier config.
std::size_t select_best(const std::vector<ConfigResult>& table);

// Evaluates every config on the same stratified folds of `train`.
CVResult grid_search(const Dataset& train, const std::vector<ForestParams>& configs, int k, std::uint64_t seed,
                     Scoring scoring = Scoring::accuracy, unsigned threads = 0);
CVResult grid_search(const Dataset& train, const FoldPlan& folds, const std::vector<ForestParams>& configs,
                     Scoring scoring = Scoring::accuracy, unsigned threads = 0);

// Header: n_trees,max_depth,max_features,criterion,mean,std,fold_0..fold_{k-1},best
void write_cv_table_csv(std::ostream& out, const CVResult& result);

}  // namespace rfprox
