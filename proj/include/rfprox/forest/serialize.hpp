#pragma once

#include <filesystem>
#include <iosfwd>

#include "rfprox/forest/forest.hpp"

namespace rfprox {

// Binary model file, little-endian throughout:
//   magic "RFPXFRST", u32 version
//   params: i32 n_trees, i32 max_depth (-1 = unbounded), u8 max_features,
//           u8 criterion, i32 min_samples_leaf, u64 seed,
//           u32 count + f64[count] explicit class weights
//   schema: str label_column, u32 n_columns, per column {str name, u8 kind,
//           u32 n_vocab, str[n_vocab]}
//   u32 n_classes, str[n_classes] class names, f64[n_classes] effective weights
//   u64 n_train, u32 n_trees, per tree:
//     i32 depth, u32 n_nodes, per node {i32 feature, f64 threshold, i32 left,
//     i32 right, i32 leaf}, u32 n_leaves, f64[n_leaves * n_classes],
//     u32[n_train] bootstrap multiplicities
// Strings are u32 length + bytes.
inline constexpr std::uint32_t kForestFormatVersion = 1;

void save_forest(std::ostream& out, const Forest& forest);
Forest load_forest(std::istream& in);  // throws FormatError

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

}  // namespace rfprox
