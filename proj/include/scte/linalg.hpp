#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <vector>

#include "scte/errors.hpp"

namespace scte {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Covariate matrix X, n individuals by d covariates. `normalized` means
/// the rows were rescaled so the largest row norm is exactly 1.
struct CovariateMatrix {
  Matrix data;
  bool normalized = false;

  Index n() const { return data.rows(); }
  Index d() const { return data.cols(); }
};

/// Thin SVD truncated to the numerical rank.
struct SVDFactors {
  Matrix U;                // n x r
  Vector singular_values;  // length r, non-increasing
  Matrix V;                // d x r
  Index rank = 0;
};

/// X projected onto singular directions with sigma_i >= sqrt(gamma).
struct SmoothedMatrix {
  double gamma = 0.0;
  std::vector<Index> kept_indices;  // Gamma*
  Index d_prime = 0;
  Matrix matrix;  // X*, n x d
  Matrix U;       // n x d'
  Vector singular_values;
  Matrix V;  // d x d'
};

struct LeverageProfile {
  Vector scores;
  Index source_rank = 0;
};

namespace detail {

inline void require_finite(const Matrix& x, const char* who) {
  if (!x.allFinite()) throw NonFiniteInput(std::string(who) + ": non-finite entry");
}

inline void require_finite(const Vector& x, const char* who) {
  if (!x.allFinite()) throw NonFiniteInput(std::string(who) + ": non-finite entry");
}

// Numerical rank under the relative machine-precision rule.
inline Index numerical_rank(const Vector& sv, Index n, Index d) {
  if (sv.size() == 0) return 0;
  const double cut = static_cast<double>(std::max(n, d)) * sv(0) * 1e-12;
  Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace detail

inline SVDFactors svd(const Matrix& x) {
  detail::require_finite(x, "svd");
  if (x.rows() < 1 || x.cols() < 1) throw InvalidDimension("svd: empty matrix");
  Eigen::BDCSVD<Matrix> dec(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = dec.singularValues();
  SVDFactors f;
  f.rank = detail::numerical_rank(sv, x.rows(), x.cols());
  // Keep the full thin factors; rank marks where the spectrum becomes noise.
  f.U = dec.matrixU();
  f.V = dec.matrixV();
  f.singular_values = sv;
  return f;
}

inline SVDFactors svd(const CovariateMatrix& x) { return svd(x.data); }

/// l_j = || U[j, 0:r] ||^2 with r the numerical rank.
inline LeverageProfile leverage_scores(const Matrix& x) {
  SVDFactors f = svd(x);
  LeverageProfile p;
  p.source_rank = f.rank;
  if (f.rank == 0) {
    p.scores = Vector::Zero(x.rows());
  } else {
    p.scores = f.U.leftCols(f.rank).rowwise().squaredNorm();
  }
  return p;
}

inline LeverageProfile leverage_scores(const CovariateMatrix& x) {
  return leverage_scores(x.data);
}

inline SmoothedMatrix smoothed_matrix(const Matrix& x, double gamma) {
  detail::require_finite(x, "smoothed_matrix");
  if (gamma < 0.0) throw InvalidDimension("smoothed_matrix: gamma < 0");
  Eigen::BDCSVD<Matrix> dec(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = dec.singularValues();
  const double thresh = std::sqrt(gamma);
  SmoothedMatrix s;
  s.gamma = gamma;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) >= thresh) s.kept_indices.push_back(i);
  if (s.kept_indices.empty())
    throw EmptySpectrum("smoothed_matrix: gamma exceeds the squared top singular value");
  s.d_prime = static_cast<Index>(s.kept_indices.size());
  s.U = dec.matrixU().leftCols(s.d_prime);
  s.V = dec.matrixV().leftCols(s.d_prime);
  s.singular_values = sv.head(s.d_prime);
  if (gamma == 0.0) {
    s.matrix = x;  // all directions kept; X* is X itself
  } else {
    s.matrix = s.U * s.singular_values.asDiagonal() * s.V.transpose();
  }
  return s;
}

/// Minimum-Euclidean-norm minimizer of ||A b - y||^2. m = 0 rows is allowed
/// and yields the zero vector.
inline Vector min_norm_least_squares(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows())
    throw DimensionMismatch("min_norm_least_squares: rows(A) != len(b)");
  if (a.rows() == 0) return Vector::Zero(a.cols());
  detail::require_finite(a, "min_norm_least_squares");
  detail::require_finite(b, "min_norm_least_squares");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  dec.setThreshold(static_cast<double>(std::max(a.rows(), a.cols())) * 1e-12);
  return dec.solve(b);
}

/// L = (2/n) min_beta ( ||(y1+y0)/2 - X beta||^2 + ||beta||^2 ).
inline double ridge_loss(const Matrix& x, const Vector& y1, const Vector& y0) {
  if (y1.size() != x.rows() || y0.size() != x.rows())
    throw DimensionMismatch("ridge_loss: outcome length != rows(X)");
  const Vector v = 0.5 * (y1 + y0);
  const Index d = x.cols();
  Matrix normal = x.transpose() * x + Matrix::Identity(d, d);
  Vector beta = normal.ldlt().solve(x.transpose() * v);
  const double fit = (v - x * beta).squaredNorm();
  return 2.0 / static_cast<double>(x.rows()) * (fit + beta.squaredNorm());
}

/// Divides every row by the global maximum row norm. Leverage-preserving.
inline CovariateMatrix row_normalize(const Matrix& x) {
  detail::require_finite(x, "row_normalize");
  const double scale = x.rowwise().norm().maxCoeff();
  if (scale == 0.0) throw ZeroMatrix("row_normalize: all rows are zero");
  return CovariateMatrix{x / scale, true};
}

}  // namespace scte
