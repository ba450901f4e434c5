#include <cmath>

#include "doctest.h"
#include "rfprox/errors.hpp"
#include "rfprox/forest/forest.hpp"
#include "rfprox/mds.hpp"
#include "rfprox/proximity.hpp"
#include "support.hpp"

using namespace rfprox;

namespace {

double dist(const Matrix<double>& x, std::size_t i, std::size_t j) {
  const double dx = x(i, 0) - x(j, 0);
  const double dy = x(i, 1) - x(j, 1);
  return std::sqrt(dx * dx + dy * dy);
}

Matrix<double> pairwise(const Matrix<double>& pts) {
  Matrix<double> d(pts.rows(), pts.rows(), 0.0);
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t j = 0; j < pts.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < pts.cols(); ++c) s += (pts(i, c) - pts(j, c)) * (pts(i, c) - pts(j, c));
      d(i, j) = std::sqrt(s);
    }
  return d;
}

Matrix<double> random_points(Rng& rng, std::size_t n, std::size_t dims) {
  Matrix<double> p(n, dims);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dims; ++c) p(i, c) = 10 * uniform_unit(rng) - 5;
  return p;
}

void check_centered(const Embedding& e) {
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < e.coordinates.rows(); ++i) s += e.coordinates(i, c);
    CHECK(std::abs(s) <= 1e-9 * static_cast<double>(e.coordinates.rows()) * 10);
  }
}

void check_non_increasing(const std::vector<double>& trace) {
  for (std::size_t t = 1; t < trace.size(); ++t) REQUIRE(trace[t] <= trace[t - 1] + 1e-15);
}

}  // namespace

TEST_CASE("two points reproduce their distance") {
  for (MdsMethod m : {MdsMethod::classical, MdsMethod::smacof}) {
    Matrix<double> d(2, 2, 0.0);
    d(0, 1) = d(1, 0) = 3.5;
    MdsOptions o;
    o.method = m;
    const auto e = mds_embed(d, o);
    CHECK(e.coordinates.rows() == 2);
    CHECK(e.coordinates.cols() == 2);
    CHECK(dist(e.coordinates, 0, 1) == doctest::Approx(3.5).epsilon(1e-9));
    CHECK(e.stress == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(e.method == m);
  }
}

TEST_CASE("equilateral triangle") {
  Matrix<double> d(3, 3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  for (MdsMethod m : {MdsMethod::classical, MdsMethod::smacof}) {
    MdsOptions o;
    o.method = m;
    const auto e = mds_embed(d, o);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) CHECK(std::abs(dist(e.coordinates, i, j) - 1.0) <= 1e-6);
  }
}

TEST_CASE("regular tetrahedron cannot be flattened") {
  Matrix<double> d(4, 4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) d(i, i) = 0.0;
  const auto e = mds_embed(d);
  CHECK(e.stress > 0.0);
  REQUIRE(!e.stress_trace.empty());
  check_non_increasing(e.stress_trace);
  CHECK(e.stress == doctest::Approx(normalized_stress(d, e.coordinates)));
}

TEST_CASE("classical scaling recovers planar configurations") {
  Rng rng(31);
  MdsOptions o;
  o.method = MdsMethod::classical;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 30);
    const auto pts = random_points(rng, n, 2);
    const auto d = pairwise(pts);
    const auto e = mds_embed(d, o);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(dist(e.coordinates, i, j) - d(i, j)));
    CHECK(worst <= 1e-6);
    CHECK(e.stress <= 1e-6);
    check_centered(e);
  }
}

TEST_CASE("smacof stress never increases and output is centered") {
  Rng rng(37);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 3 + uniform_index(rng, 25);
    const auto d = pairwise(random_points(rng, n, 2 + uniform_index(rng, 4)));
    MdsOptions o;
    o.seed = static_cast<std::uint64_t>(trial);
    const auto e = mds_embed(d, o);
    REQUIRE(!e.stress_trace.empty());
    check_non_increasing(e.stress_trace);
    CHECK(e.stress == doctest::Approx(e.stress_trace.back()).epsilon(1e-9).scale(1.0));
    CHECK(e.iterations <= o.max_iter);
    CHECK(e.seed == o.seed);
    check_centered(e);
    const auto again = mds_embed(d, o);
    CHECK(again.coordinates == e.coordinates);
  }
}

TEST_CASE("all-zero distances map to the origin") {
  for (MdsMethod m : {MdsMethod::classical, MdsMethod::smacof}) {
    MdsOptions o;
    o.method = m;
    const auto e = mds_embed(Matrix<double>(5, 5, 0.0), o);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(e.coordinates(i, 0) == 0.0);
      CHECK(e.coordinates(i, 1) == 0.0);
    }
    CHECK(e.stress == 0.0);
  }
}

TEST_CASE("input validation") {
  Matrix<double> asym(3, 3, 0.0);
  asym(0, 1) = 1.0;
  asym(1, 0) = 2.0;
  CHECK_THROWS_AS(mds_embed(asym), NotSymmetric);
  CHECK_THROWS_AS(mds_embed(Matrix<double>(2, 3, 0.0)), NotSymmetric);
  Matrix<double> diag(3, 3, 1.0);
  CHECK_THROWS_AS(mds_embed(diag), NonzeroDiagonal);
  CHECK(parse_mds_method("classical") == MdsMethod::classical);
  CHECK(parse_mds_method(to_string(MdsMethod::smacof)) == MdsMethod::smacof);
  CHECK_THROWS_AS(parse_mds_method("tsne"), InvalidParams);
}

TEST_CASE("normalized stress formula") {
  Matrix<double> delta(3, 3, 0.0);
  delta(0, 1) = delta(1, 0) = 1.0;
  delta(0, 2) = delta(2, 0) = 2.0;
  delta(1, 2) = delta(2, 1) = 2.0;
  Matrix<double> x(3, 2, 0.0);
  x(1, 0) = 2.0;  // d01 = 2, d02 = 0, d12 = 2
  const double expected = std::sqrt((1.0 + 4.0 + 0.0) / (1.0 + 4.0 + 4.0));
  CHECK(normalized_stress(delta, x) == doctest::Approx(expected));
  CHECK(normalized_stress(Matrix<double>(3, 3, 0.0), x) == 0.0);
}

TEST_CASE("forest distances embed the same way from either input form") {
  Rng rng(2);
  const Dataset d = test::random_dataset(rng, 40, 3, 2, 2.0);
  ForestParams p;
  p.n_trees = 30;
  const Forest f = fit_forest(d, p);
  const DistanceMatrix dm = distance_matrix(proximity_matrix(f, d)).with_zero_diagonal();
  const auto a = mds_embed(dm);
  const auto b = mds_embed(dm.to_dense());
  CHECK(a.coordinates == b.coordinates);
  CHECK(a.stress == b.stress);
}
