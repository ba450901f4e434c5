#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfprox/matrix.hpp"
#include "rfprox/proximity.hpp"

namespace rfprox {

enum class MdsMethod { classical, smacof };
std::string to_string(MdsMethod m);
MdsMethod parse_mds_method(const std::string& text);  // throws InvalidParams

struct MdsOptions {
  MdsMethod method = MdsMethod::smacof;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;
};

struct Embedding {
  Matrix<double> coordinates;  // n x 2, column means 0
  double stress = 0.0;         // normalized stress-1
  MdsMethod method = MdsMethod::smacof;
  std::uint64_t seed = 0;
  // smacof: stress of the start and after every accepted iteration.
  std::vector<double> stress_trace;
  int iterations = 0;
};

// sqrt(sum (d_ij - delta_ij)^2 / sum delta_ij^2) over pairs i < j; 0 when
// every delta is 0.
double normalized_stress(const Matrix<double>& delta, const Matrix<double>& coordinates);

// Input must be square, symmetric and have a zero diagonal (NotSymmetric /
// NonzeroDiagonal otherwise, with 1e-12 absolute slack). Smacof stops once an
// iteration lowers the stress by less than tol times its previous value, after
// max_iter iterations, or if an update would raise the stress, which only
// happens through rounding at convergence.
Embedding mds_embed(const Matrix<double>& delta, const MdsOptions& options = {});
Embedding mds_embed(const DistanceMatrix& dm, const MdsOptions& options = {});

}  // namespace rfprox
