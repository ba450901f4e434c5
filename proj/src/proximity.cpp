#include "rfprox/proximity.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <ostream>

#include "rfprox/data/csv.hpp"
#include "rfprox/errors.hpp"
#include "rfprox/io/binary.hpp"
#include "rfprox/parallel.hpp"

namespace rfprox {

std::string to_string(ProximityKind k) {
  switch (k) {
    case ProximityKind::original: return "original";
    case ProximityKind::oob: return "oob";
    case ProximityKind::gap: return "gap";
  }
  return "original";
}

ProximityKind parse_proximity_kind(const std::string& text) {
  if (text == "original") return ProximityKind::original;
  if (text == "oob") return ProximityKind::oob;
  if (text == "gap") return ProximityKind::gap;
  throw InvalidParams("unknown proximity kind '" + text + "'");
}

ProximityMatrix::ProximityMatrix(std::size_t n, ProximityKind kind) : n_(n), kind_(kind) {
  if (n > kDefaultMaxRecords) throw TooLarge(n, kDefaultMaxRecords);
  values_.assign(n * (n + 1) / 2, 0.0);
  if (kind == ProximityKind::oob) pair_undefined_.assign(values_.size(), 0);
  if (kind == ProximityKind::gap) row_undefined_.assign(n, 0);
}

bool ProximityMatrix::undefined(std::size_t i, std::size_t j) const {
  if (!pair_undefined_.empty()) return pair_undefined_[i <= j ? packed_index(n_, i, j) : packed_index(n_, j, i)] != 0;
  if (!row_undefined_.empty()) return row_undefined_[i] != 0 && row_undefined_[j] != 0;
  return false;
}

void ProximityMatrix::mark_undefined(std::size_t i, std::size_t j) {
  if (pair_undefined_.empty()) pair_undefined_.assign(values_.size(), 0);
  pair_undefined_[i <= j ? packed_index(n_, i, j) : packed_index(n_, j, i)] = 1;
}

void ProximityMatrix::mark_row_undefined(std::size_t i) {
  if (row_undefined_.empty()) row_undefined_.assign(n_, 0);
  row_undefined_[i] = 1;
}

std::size_t ProximityMatrix::undefined_pair_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) count += undefined(i, j) ? 1 : 0;
  return count;
}

Matrix<double> ProximityMatrix::to_dense() const {
  Matrix<double> m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) m(i, j) = m(j, i) = values_[packed_index(n_, i, j)];
  return m;
}

namespace {

// Members of every (tree, leaf), ascending by row, in CSR form.
struct LeafGroups {
  std::vector<std::vector<std::size_t>> offsets;  // per tree, n_leaves + 1
  std::vector<std::vector<std::uint32_t>> members;

  std::span<const std::uint32_t> group(std::size_t t, std::int32_t leaf) const {
    const auto& off = offsets[t];
    const auto l = static_cast<std::size_t>(leaf);
    return {members[t].data() + off[l], off[l + 1] - off[l]};
  }
};

// keep(t, i) selects which rows enter the groups of tree t.
template <typename Keep>
LeafGroups group_leaves(const LeafMatrix& leaves, Keep keep) {
  const std::size_t n = leaves.rows();
  const std::size_t trees = leaves.cols();
  LeafGroups g;
  g.offsets.resize(trees);
  g.members.resize(trees);
  for (std::size_t t = 0; t < trees; ++t) {
    std::int32_t max_leaf = -1;
    for (std::size_t i = 0; i < n; ++i) max_leaf = std::max(max_leaf, leaves(i, t));
    auto& off = g.offsets[t];
    off.assign(static_cast<std::size_t>(max_leaf + 1) + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (keep(t, i)) ++off[static_cast<std::size_t>(leaves(i, t)) + 1];
    for (std::size_t l = 1; l < off.size(); ++l) off[l] += off[l - 1];
    auto& mem = g.members[t];
    mem.resize(off.back());
    std::vector<std::size_t> cursor(off.begin(), off.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      if (keep(t, i)) mem[cursor[static_cast<std::size_t>(leaves(i, t))]++] = static_cast<std::uint32_t>(i);
  }
  return g;
}

void check_bootstrap(const LeafMatrix& leaves, std::span<const std::vector<std::uint32_t>> bootstrap) {
  if (bootstrap.size() != leaves.cols())
    throw SchemaMismatch("bootstrap bookkeeping covers " + std::to_string(bootstrap.size()) + " trees, leaves " +
                         std::to_string(leaves.cols()));
  for (const auto& counts : bootstrap)
    if (counts.size() != leaves.rows())
      throw SchemaMismatch("rows do not match the training set the bootstrap refers to");
}

void check_training_set(const Forest& f, const Dataset& d) {
  if (d.n() != f.n_train())
    throw SchemaMismatch("OOB and GAP proximities need the training set (" + std::to_string(f.n_train()) +
                         " rows), got " + std::to_string(d.n()));
}

}  // namespace

ProximityMatrix proximity_from_leaves(const LeafMatrix& leaves, unsigned threads) {
  const std::size_t n = leaves.rows();
  const std::size_t trees = leaves.cols();
  ProximityMatrix p(n, ProximityKind::original);
  const auto groups = group_leaves(leaves, [](std::size_t, std::size_t) { return true; });
  const double denom = static_cast<double>(trees);
  auto& values = p.packed();
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::uint32_t> counts(n - i, 0);
    for (std::size_t t = 0; t < trees; ++t) {
      const auto members = groups.group(t, leaves(i, t));
      auto it = std::lower_bound(members.begin(), members.end(), static_cast<std::uint32_t>(i));
      for (; it != members.end(); ++it) ++counts[*it - i];
    }
    const std::size_t base = packed_index(n, i, i);
    for (std::size_t k = 0; k < counts.size(); ++k) values[base + k] = static_cast<double>(counts[k]) / denom;
  });
  return p;
}

ProximityMatrix oob_proximity_from_leaves(const LeafMatrix& leaves,
                                          std::span<const std::vector<std::uint32_t>> bootstrap,
                                          unsigned threads) {
  check_bootstrap(leaves, bootstrap);
  const std::size_t n = leaves.rows();
  const std::size_t trees = leaves.cols();
  ProximityMatrix p(n, ProximityKind::oob);
  const auto is_oob = [&](std::size_t t, std::size_t i) { return bootstrap[t][i] == 0; };
  const auto groups = group_leaves(leaves, is_oob);

  // OOB membership as bitsets so the shared-OOB denominator is a popcount.
  const std::size_t words = (trees + 63) / 64;
  std::vector<std::uint64_t> bits(n * words, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < trees; ++t)
      if (is_oob(t, i)) bits[i * words + t / 64] |= std::uint64_t{1} << (t % 64);

  auto& values = p.packed();
  std::vector<std::uint8_t> flags(values.size(), 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::uint32_t> shared_leaf(n - i, 0);
    for (std::size_t t = 0; t < trees; ++t) {
      if (!is_oob(t, i)) continue;
      const auto members = groups.group(t, leaves(i, t));
      auto it = std::lower_bound(members.begin(), members.end(), static_cast<std::uint32_t>(i));
      for (; it != members.end(); ++it) ++shared_leaf[*it - i];
    }
    const std::size_t base = packed_index(n, i, i);
    const std::uint64_t* bi = bits.data() + i * words;
    for (std::size_t j = i; j < n; ++j) {
      const std::uint64_t* bj = bits.data() + j * words;
      std::uint32_t both = 0;
      for (std::size_t w = 0; w < words; ++w) both += static_cast<std::uint32_t>(std::popcount(bi[w] & bj[w]));
      if (both == 0) {
        flags[base + (j - i)] = 1;
      } else {
        values[base + (j - i)] = static_cast<double>(shared_leaf[j - i]) / static_cast<double>(both);
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (flags[packed_index(n, i, j)] != 0) p.mark_undefined(i, j);
  return p;
}

ProximityMatrix gap_proximity_from_leaves(const LeafMatrix& leaves,
                                          std::span<const std::vector<std::uint32_t>> bootstrap,
                                          unsigned threads) {
  check_bootstrap(leaves, bootstrap);
  const std::size_t n = leaves.rows();
  const std::size_t trees = leaves.cols();
  ProximityMatrix p(n, ProximityKind::gap);
  const auto groups = group_leaves(leaves, [&](std::size_t t, std::size_t i) { return bootstrap[t][i] > 0; });

  // In-bag multiset size of every leaf.
  std::vector<std::vector<std::uint64_t>> mass(trees);
  for (std::size_t t = 0; t < trees; ++t) {
    mass[t].assign(groups.offsets[t].size() - 1, 0);
    for (std::size_t i = 0; i < n; ++i) mass[t][static_cast<std::size_t>(leaves(i, t))] += bootstrap[t][i];
  }

  Matrix<double> asym(n, n);
  std::vector<std::uint8_t> undefined(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    auto row = asym.row(i);
    std::size_t oob_trees = 0;
    for (std::size_t t = 0; t < trees; ++t) {
      if (bootstrap[t][i] != 0) continue;
      ++oob_trees;
      const std::int32_t leaf = leaves(i, t);
      const double m = static_cast<double>(mass[t][static_cast<std::size_t>(leaf)]);
      for (std::uint32_t j : groups.group(t, leaf)) row[j] += static_cast<double>(bootstrap[t][j]) / m;
    }
    if (oob_trees == 0) {
      undefined[i] = 1;
      return;
    }
    const double s = static_cast<double>(oob_trees);
    for (double& v : row) v /= s;
  });

  auto& values = p.packed();
  for (std::size_t i = 0; i < n; ++i) {
    if (undefined[i] != 0) p.mark_row_undefined(i);
    for (std::size_t j = i + 1; j < n; ++j) values[packed_index(n, i, j)] = (asym(i, j) + asym(j, i)) / 2.0;
  }
  p.set_asymmetric(std::move(asym));
  return p;
}

ProximityMatrix proximity_matrix(const Forest& f, const Dataset& d, unsigned threads) {
  f.check_compatible(d);
  return proximity_from_leaves(apply(f, d, threads), threads);
}

ProximityMatrix oob_proximity_matrix(const Forest& f, const Dataset& d, unsigned threads) {
  f.check_compatible(d);
  check_training_set(f, d);
  return oob_proximity_from_leaves(apply(f, d, threads), f.all_bootstrap_counts(), threads);
}

ProximityMatrix gap_proximity_matrix(const Forest& f, const Dataset& d, unsigned threads) {
  f.check_compatible(d);
  check_training_set(f, d);
  return gap_proximity_from_leaves(apply(f, d, threads), f.all_bootstrap_counts(), threads);
}

ProximityMatrix compute_proximity(ProximityKind kind, const Forest& f, const Dataset& d, unsigned threads) {
  switch (kind) {
    case ProximityKind::original: return proximity_matrix(f, d, threads);
    case ProximityKind::oob: return oob_proximity_matrix(f, d, threads);
    case ProximityKind::gap: return gap_proximity_matrix(f, d, threads);
  }
  throw InvalidParams("unknown proximity kind");
}

ProximityMatrix proximity_oracle_from_leaves(const LeafMatrix& leaves,
                                             std::span<const std::vector<std::uint32_t>> bootstrap,
                                             ProximityKind kind) {
  const std::size_t n = leaves.rows();
  const std::size_t trees = leaves.cols();
  if (n > kOracleMaxRecords) throw TooLarge(n, kOracleMaxRecords);
  if (kind != ProximityKind::original) check_bootstrap(leaves, bootstrap);
  ProximityMatrix p(n, kind);

  if (kind == ProximityKind::original) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        std::uint32_t same = 0;
        for (std::size_t t = 0; t < trees; ++t)
          if (leaves(i, t) == leaves(j, t)) ++same;
        p.set(i, j, static_cast<double>(same) / static_cast<double>(trees));
      }
    return p;
  }

  if (kind == ProximityKind::oob) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        std::uint32_t both = 0;
        std::uint32_t same = 0;
        for (std::size_t t = 0; t < trees; ++t) {
          if (bootstrap[t][i] != 0 || bootstrap[t][j] != 0) continue;
          ++both;
          if (leaves(i, t) == leaves(j, t)) ++same;
        }
        if (both == 0) p.mark_undefined(i, j);
        else p.set(i, j, static_cast<double>(same) / static_cast<double>(both));
      }
    return p;
  }

  // GAP: literal evaluation of the displayed sum for every ordered pair.
  Matrix<double> asym(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t oob_trees = 0;
    for (std::size_t t = 0; t < trees; ++t)
      if (bootstrap[t][i] == 0) ++oob_trees;
    if (oob_trees == 0) {
      p.mark_row_undefined(i);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t t = 0; t < trees; ++t) {
        if (bootstrap[t][i] != 0 || bootstrap[t][j] == 0 || leaves(i, t) != leaves(j, t)) continue;
        std::uint64_t m = 0;
        for (std::size_t k = 0; k < n; ++k)
          if (leaves(k, t) == leaves(i, t)) m += bootstrap[t][k];
        sum += static_cast<double>(bootstrap[t][j]) / static_cast<double>(m);
      }
      asym(i, j) = sum / static_cast<double>(oob_trees);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) p.set(i, j, (asym(i, j) + asym(j, i)) / 2.0);
  p.set_asymmetric(std::move(asym));
  return p;
}

ProximityMatrix proximity_oracle(const Forest& f, const Dataset& d, ProximityKind kind) {
  f.check_compatible(d);
  if (d.n() > kOracleMaxRecords) throw TooLarge(d.n(), kOracleMaxRecords);
  if (kind != ProximityKind::original) check_training_set(f, d);
  LeafMatrix leaves(d.n(), f.n_trees());
  for (std::size_t i = 0; i < d.n(); ++i)
    for (std::size_t t = 0; t < f.n_trees(); ++t) leaves(i, t) = f.trees()[t].leaf_of(d.row(i));
  return proximity_oracle_from_leaves(leaves, f.all_bootstrap_counts(), kind);
}

ProximityMatrix subset(const ProximityMatrix& p, std::span<const std::size_t> rows) {
  ProximityMatrix out(rows.size(), p.kind());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (p.row_undefined(rows[a])) out.mark_row_undefined(a);
    for (std::size_t b = a; b < rows.size(); ++b) {
      out.set(a, b, p(rows[a], rows[b]));
      if (p.kind() == ProximityKind::oob && p.undefined(rows[a], rows[b])) out.mark_undefined(a, b);
    }
  }
  if (p.asymmetric().rows() == p.n() && p.n() > 0) {
    Matrix<double> asym(rows.size(), rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < rows.size(); ++b) asym(a, b) = p.asymmetric()(rows[a], rows[b]);
    out.set_asymmetric(std::move(asym));
  }
  return out;
}

DistanceMatrix::DistanceMatrix(const ProximityMatrix& p) : n_(p.n()), values_(p.packed().size()) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] = 1.0 - p.packed()[k];
}

DistanceMatrix DistanceMatrix::with_zero_diagonal() const {
  DistanceMatrix out = *this;
  for (std::size_t i = 0; i < n_; ++i) out.values_[packed_index(n_, i, i)] = 0.0;
  return out;
}

Matrix<double> DistanceMatrix::to_dense() const {
  Matrix<double> m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) m(i, j) = m(j, i) = values_[packed_index(n_, i, j)];
  return m;
}

DistanceMatrix distance_matrix(const ProximityMatrix& p) { return DistanceMatrix(p); }

namespace {
constexpr std::array<char, 8> kProxMagic{'R', 'F', 'P', 'X', 'P', 'R', 'O', 'X'};
}

void write_proximity_binary(std::ostream& out, const ProximityMatrix& p) {
  out.write(kProxMagic.data(), kProxMagic.size());
  io::write<std::uint32_t>(out, kProximityFormatVersion);
  io::write<std::uint64_t>(out, p.n());
  io::write<std::uint8_t>(out, static_cast<std::uint8_t>(p.kind()));
  out.write(reinterpret_cast<const char*>(p.packed().data()),
            static_cast<std::streamsize>(p.packed().size() * sizeof(double)));
  if (!out) throw Error("failed writing proximity matrix");
}

ProximityMatrix read_proximity_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kProxMagic) throw FormatError("not a proximity file");
  if (io::read<std::uint32_t>(in) != kProximityFormatVersion) throw FormatError("unsupported proximity version");
  const auto n = io::read<std::uint64_t>(in);
  const auto kind = io::read<std::uint8_t>(in);
  if (kind > 2) throw FormatError("bad proximity kind");
  if (n > kDefaultMaxRecords) throw TooLarge(n, kDefaultMaxRecords);
  ProximityMatrix p(n, static_cast<ProximityKind>(kind));
  auto& values = p.packed();
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw FormatError("truncated proximity file");
  return p;
}

void write_proximity_binary(const std::filesystem::path& path, const ProximityMatrix& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_proximity_binary(out, p);
}

ProximityMatrix read_proximity_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_proximity_binary(in);
}

void write_proximity_csv(std::ostream& out, const ProximityMatrix& p, double cutoff) {
  out << "i,j,value\n";
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = i + 1; j < p.n(); ++j) {
      const double v = p(i, j);
      if (v > cutoff) out << i << ',' << j << ',' << format_double(v) << '\n';
    }
}

}  // namespace rfprox
