#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rfprox/data/dataset.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/matrix.hpp"

namespace rfprox {

enum class ProximityKind { original, oob, gap };

std::string to_string(ProximityKind k);
ProximityKind parse_proximity_kind(const std::string& text);  // throws InvalidParams

// Largest n accepted by the packed in-memory storage (n(n+1)/2 doubles).
inline constexpr std::size_t kDefaultMaxRecords = 12000;
// The brute-force oracle refuses anything bigger.
inline constexpr std::size_t kOracleMaxRecords = 2000;

// Index of (i, j), i <= j, in a row-major packed upper triangle with diagonal.
inline std::size_t packed_index(std::size_t n, std::size_t i, std::size_t j) {
  return i * n - i * (i - 1) / 2 + (j - i);
}

// Symmetric n x n matrix stored as its upper triangle.
class ProximityMatrix {
 public:
  ProximityMatrix() = default;
  ProximityMatrix(std::size_t n, ProximityKind kind);

  std::size_t n() const { return n_; }
  ProximityKind kind() const { return kind_; }

  double operator()(std::size_t i, std::size_t j) const {
    return i <= j ? values_[packed_index(n_, i, j)] : values_[packed_index(n_, j, i)];
  }
  void set(std::size_t i, std::size_t j, double v) {
    if (i <= j) values_[packed_index(n_, i, j)] = v;
    else values_[packed_index(n_, j, i)] = v;
  }
  const std::vector<double>& packed() const { return values_; }
  std::vector<double>& packed() { return values_; }

  // OOB kind: the pair never shared an OOB tree. GAP kind: i was OOB in no tree.
  bool undefined(std::size_t i, std::size_t j) const;
  bool row_undefined(std::size_t i) const { return !row_undefined_.empty() && row_undefined_[i] != 0; }
  std::size_t undefined_pair_count() const;

  // GAP only: the unsymmetrized n x n matrix; empty for other kinds.
  const Matrix<double>& asymmetric() const { return asymmetric_; }

  Matrix<double> to_dense() const;

  bool operator==(const ProximityMatrix&) const = default;

  void mark_undefined(std::size_t i, std::size_t j);
  void mark_row_undefined(std::size_t i);
  void set_asymmetric(Matrix<double> m) { asymmetric_ = std::move(m); }

 private:
  std::size_t n_ = 0;
  ProximityKind kind_ = ProximityKind::original;
  std::vector<double> values_;
  std::vector<std::uint8_t> pair_undefined_;  // packed like values_, OOB kind only
  std::vector<std::uint8_t> row_undefined_;   // GAP kind only
  Matrix<double> asymmetric_;
};

// Leaf-level entry points. `leaves` is n x T; `bootstrap[t][i]` is the in-bag
// multiplicity of row i in tree t, so the rows must be the training rows.
ProximityMatrix proximity_from_leaves(const LeafMatrix& leaves, unsigned threads = 0);
ProximityMatrix oob_proximity_from_leaves(const LeafMatrix& leaves,
                                          std::span<const std::vector<std::uint32_t>> bootstrap,
                                          unsigned threads = 0);
ProximityMatrix gap_proximity_from_leaves(const LeafMatrix& leaves,
                                          std::span<const std::vector<std::uint32_t>> bootstrap,
                                          unsigned threads = 0);

// Fraction of trees in which i and j share a leaf. Works on any dataset with
// the forest's schema.
ProximityMatrix proximity_matrix(const Forest& f, const Dataset& d, unsigned threads = 0);
// OOB and GAP need the bootstrap bookkeeping, so d must be the training set.
ProximityMatrix oob_proximity_matrix(const Forest& f, const Dataset& d, unsigned threads = 0);
ProximityMatrix gap_proximity_matrix(const Forest& f, const Dataset& d, unsigned threads = 0);
ProximityMatrix compute_proximity(ProximityKind kind, const Forest& f, const Dataset& d, unsigned threads = 0);

// Naive per-pair, per-tree evaluation. Routes every record through every tree
// itself instead of using apply(). Throws TooLarge above kOracleMaxRecords.
ProximityMatrix proximity_oracle(const Forest& f, const Dataset& d, ProximityKind kind);
ProximityMatrix proximity_oracle_from_leaves(const LeafMatrix& leaves,
                                             std::span<const std::vector<std::uint32_t>> bootstrap,
                                             ProximityKind kind);

// Restriction to the given rows, in that order. Undefined flags carry over.
ProximityMatrix subset(const ProximityMatrix& p, std::span<const std::size_t> rows);

// 1 - proximity, entrywise.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(const ProximityMatrix& p);

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return i <= j ? values_[packed_index(n_, i, j)] : values_[packed_index(n_, j, i)];
  }
  // Copy with d(i, i) = 0; OOB and GAP proximities do not guarantee a unit diagonal.
  DistanceMatrix with_zero_diagonal() const;
  Matrix<double> to_dense() const;

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

DistanceMatrix distance_matrix(const ProximityMatrix& p);

// Binary layout: magic "RFPXPROX", u32 version, u64 n, u8 kind, then the
// packed upper triangle as f64 (n(n+1)/2 values, row-major).
inline constexpr std::uint32_t kProximityFormatVersion = 1;
void write_proximity_binary(std::ostream& out, const ProximityMatrix& p);
ProximityMatrix read_proximity_binary(std::istream& in);
void write_proximity_binary(const std::filesystem::path& path, const ProximityMatrix& p);
ProximityMatrix read_proximity_binary(const std::filesystem::path& path);

// CSV "i,j,value" for j > i and value > cutoff. i and j are row positions.
void write_proximity_csv(std::ostream& out, const ProximityMatrix& p, double cutoff = 0.0);

}  // namespace rfprox
