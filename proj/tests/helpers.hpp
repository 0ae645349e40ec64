#pragma once

#include <random>

#include "scte/linalg.hpp"
#include "scte/rng.hpp"

namespace scte::test {

inline Matrix random_matrix(Index n, Index d, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  return x;
}

// Rank-deficient by construction: product of thin factors.
inline Matrix random_low_rank(Index n, Index d, Index r, Rng& rng) {
  return random_matrix(n, r, rng) * random_matrix(r, d, rng);
}

inline Vector random_vector(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Independent pseudo-inverse route (Jacobi SVD, explicit reciprocal spectrum)
// used as the oracle against the implementation's solver path.
inline Matrix pinv_oracle(const Matrix& a, double tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = dec.singularValues();
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) inv(i) = 1.0 / sv(i);
  return dec.matrixV() * inv.asDiagonal() * dec.matrixU().transpose();
}

}  // namespace scte::test
