#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdint>

#include "scte/errors.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"

namespace scte {

struct SyntheticSpec {
  Index n = 0;
  Index d = 0;
  double sigma = 0.0;
  double cov_scale = 2.0;  // Sigma_ij = cov_scale * decay^|i-j|
  double decay = 0.5;
  std::uint64_t seed = 0;
};

/// Sigma_ij = 2 * 0.5^|i-j| (by default); symmetric positive definite.
inline Matrix covariance_matrix(const SyntheticSpec& spec) {
  Matrix sigma(spec.d, spec.d);
  for (Index i = 0; i < spec.d; ++i)
    for (Index j = 0; j < spec.d; ++j)
      sigma(i, j) = spec.cov_scale * std::pow(spec.decay, std::abs(static_cast<double>(i - j)));
  return sigma;
}

/// Rows drawn from a multivariate t with 1 degree of freedom: (L g)/sqrt(u)
/// with u a chi-square(1) draw, then globally row-normalized.
inline CovariateMatrix gen_t_covariates(const SyntheticSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.d < 1) throw InvalidDimension("gen_t_covariates: need n, d >= 1");
  const Matrix sigma = covariance_matrix(spec);
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw CholeskyFailure("gen_t_covariates: covariance not positive definite");
  const Matrix l = llt.matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(spec.n, spec.d);
  Vector g(spec.d);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index k = 0; k < spec.d; ++k) g(k) = normal(rng);
    double u = normal(rng);
    u *= u;  // chi-square with 1 dof
    while (u == 0.0) {
      u = normal(rng);
      u *= u;
    }
    x.row(i) = (l * g).transpose() / std::sqrt(u);
  }
  return row_normalize(x);
}

/// Non-negative unit vector: uniform [0,1] coordinates, then normalized.
inline Vector gen_unit_beta(Index d, Rng& rng) {
  if (d < 1) throw InvalidDimension("gen_unit_beta: need d >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector beta(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index k = 0; k < d; ++k) beta(k) = unif(rng);
    norm = beta.norm();
  }
  return beta / norm;
}

/// y^i = X beta^i + zeta^i with zeta i.i.d. N(0, sigma^2).
inline PotentialOutcomes gen_outcomes(const CovariateMatrix& x, const Vector& beta1,
                                      const Vector& beta0, double sigma, Rng& rng) {
  if (beta1.size() != x.d() || beta0.size() != x.d())
    throw DimensionMismatch("gen_outcomes: coefficient length != d");
  if (sigma < 0.0) throw InvalidDimension("gen_outcomes: sigma < 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  PotentialOutcomes po;
  po.sigma = sigma;
  po.y1 = x.data * beta1;
  po.y0 = x.data * beta0;
  for (Index j = 0; j < x.n(); ++j) po.y1(j) += sigma * normal(rng);
  for (Index j = 0; j < x.n(); ++j) po.y0(j) += sigma * normal(rng);
  po.beta1 = beta1;
  po.beta0 = beta0;
  return po;
}

/// Full synthetic instance per the spec'd recipe; sigma defaults to
/// 1/sqrt(d) when the spec leaves it at 0 and the caller asks for that.
inline std::pair<CovariateMatrix, PotentialOutcomes> gen_synthetic(const SyntheticSpec& spec,
                                                                   Rng& rng) {
  CovariateMatrix x = gen_t_covariates(spec, rng);
  const Vector beta1 = gen_unit_beta(spec.d, rng);
  const Vector beta0 = gen_unit_beta(spec.d, rng);
  return {x, gen_outcomes(x, beta1, beta0, spec.sigma, rng)};
}

}  // namespace scte
