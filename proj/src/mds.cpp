#include "rfprox/mds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rfprox/errors.hpp"
#include "rfprox/rng.hpp"

namespace rfprox {

std::string to_string(MdsMethod m) { return m == MdsMethod::classical ? "classical" : "smacof"; }

MdsMethod parse_mds_method(const std::string& text) {
  if (text == "classical") return MdsMethod::classical;
  if (text == "smacof") return MdsMethod::smacof;
  throw InvalidParams("unknown MDS method '" + text + "'");
}

namespace {

constexpr double kSlack = 1e-12;

void validate(const Matrix<double>& delta) {
  if (delta.rows() != delta.cols()) throw NotSymmetric(std::string("distance matrix must be square"));
  const std::size_t n = delta.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(delta(i, i)) > kSlack) throw NonzeroDiagonal(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!std::isfinite(delta(i, j)) || delta(i, j) < 0.0) throw InvalidParams("distances must be finite and >= 0");
      if (std::abs(delta(i, j) - delta(j, i)) > kSlack) throw NotSymmetric(i, j);
    }
  }
}

void center(Matrix<double>& x) {
  const std::size_t n = x.rows();
  if (n == 0) return;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, c);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x(i, c) -= mean;
  }
}

double euclid(const Matrix<double>& x, std::size_t i, std::size_t j) {
  const double dx = x(i, 0) - x(j, 0);
  const double dy = x(i, 1) - x(j, 1);
  return std::sqrt(dx * dx + dy * dy);
}

Matrix<double> classical(const Matrix<double>& delta) {
  const auto n = static_cast<Eigen::Index>(delta.rows());
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = delta(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      b(i, j) = -0.5 * d * d;
    }
  // Double centering.
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const Eigen::VectorXd col_mean = b.colwise().mean();
  const double grand = b.mean();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) += grand - row_mean(i) - col_mean(j);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  Matrix<double> x(static_cast<std::size_t>(n), 2);
  for (int axis = 0; axis < 2 && axis < n; ++axis) {
    // Eigenvalues come ascending.
    const Eigen::Index k = n - 1 - axis;
    const double lambda = std::max(solver.eigenvalues()(k), 0.0);
    Eigen::VectorXd v = solver.eigenvectors().col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;  // fixed sign so repeated runs agree
    const double s = std::sqrt(lambda);
    for (Eigen::Index i = 0; i < n; ++i) x(static_cast<std::size_t>(i), static_cast<std::size_t>(axis)) = v(i) * s;
  }
  center(x);
  return x;
}

void smacof(const Matrix<double>& delta, const MdsOptions& options, Embedding& e) {
  const std::size_t n = delta.rows();
  Rng rng = make_rng(options.seed, 0);
  Matrix<double> x(n, 2);
  for (double& v : x.data()) v = uniform_unit(rng) * 2.0 - 1.0;
  center(x);

  double stress = normalized_stress(delta, x);
  e.stress_trace.push_back(stress);
  Matrix<double> next(n, 2);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < options.max_iter; ++it) {
    // Guttman transform: next = B(x) x / n.
    for (std::size_t i = 0; i < n; ++i) {
      double bii = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = euclid(x, i, j);
        const double bij = d > 0.0 ? -delta(i, j) / d : 0.0;
        bii -= bij;
        sx += bij * x(j, 0);
        sy += bij * x(j, 1);
      }
      next(i, 0) = (bii * x(i, 0) + sx) * inv_n;
      next(i, 1) = (bii * x(i, 1) + sy) * inv_n;
    }
    const double s = normalized_stress(delta, next);
    if (s > stress) break;
    std::swap(x, next);
    e.stress_trace.push_back(s);
    e.iterations = it + 1;
    const bool done = stress - s < options.tol * stress;
    stress = s;
    if (done) break;
  }
  center(x);
  e.coordinates = std::move(x);
}

}  // namespace

double normalized_stress(const Matrix<double>& delta, const Matrix<double>& coordinates) {
  const std::size_t n = delta.rows();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = euclid(coordinates, i, j) - delta(i, j);
      num += r * r;
      den += delta(i, j) * delta(i, j);
    }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

Embedding mds_embed(const Matrix<double>& delta, const MdsOptions& options) {
  validate(delta);
  if (options.max_iter < 0 || !(options.tol >= 0.0)) throw InvalidParams("max_iter and tol must be nonnegative");
  Embedding e;
  e.method = options.method;
  e.seed = options.seed;
  const std::size_t n = delta.rows();
  bool all_zero = true;
  for (double v : delta.data()) all_zero = all_zero && v == 0.0;
  if (n == 0 || all_zero) {
    e.coordinates = Matrix<double>(n, 2);
    if (options.method == MdsMethod::smacof) e.stress_trace = {0.0};
    return e;
  }
  if (options.method == MdsMethod::classical) {
    e.coordinates = classical(delta);
  } else {
    smacof(delta, options, e);
  }
  e.stress = normalized_stress(delta, e.coordinates);
  return e;
}

Embedding mds_embed(const DistanceMatrix& dm, const MdsOptions& options) {
  return mds_embed(dm.to_dense(), options);
}

}  // namespace rfprox
