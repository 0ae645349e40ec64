#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "scte/errors.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"

namespace scte {

struct GswParams {
  double phi = 0.5;     // robustness/balance tradeoff; 1 = pure randomization
  int max_retries = 8;  // redraws for degenerate partitions (used by callers)
};

struct Assignment {
  Vector z;  // entries exactly +-1
  std::vector<Index> s_plus;
  std::vector<Index> s_minus;
  Index iterations = 0;
  double max_abs_iterate = 0.0;  // largest |z_j| seen before snapping
};

namespace detail {

constexpr double kFreezeTol = 1e-12;

}  // namespace detail

/// One run of the Gram-Schmidt walk on augmented vectors
/// b_j = (sqrt(phi) e_j ; sqrt(1-phi) x_j / xi), xi = max row norm.
/// Starts from the zero fractional assignment, picks pivots uniformly among
/// live coordinates, steps to a boundary each iteration and freezes every
/// coordinate that lands on +-1. Marginals are 1/2 and the law of z is
/// symmetric under negation.
inline Assignment gsw_assign(const Matrix& x, const GswParams& params, Rng& rng) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (n < 1) throw InvalidDimension("gsw_assign: empty population");
  detail::require_finite(x, "gsw_assign");
  if (params.phi <= 0.0 || params.phi > 1.0)
    throw InvalidDimension("gsw_assign: phi must lie in (0, 1]");

  const double xi = x.rowwise().norm().maxCoeff();
  if (xi == 0.0 && params.phi < 1.0)
    throw ZeroCovariates("gsw_assign: all-zero covariates; use phi = 1");
  const double phi = params.phi;
  // Covariate coupling constant; 0 disables the covariate block entirely.
  const double c = (phi < 1.0 && xi > 0.0) ? (1.0 - phi) / (xi * xi) : 0.0;

  Vector z = Vector::Zero(n);
  std::vector<Index> alive(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) alive[static_cast<std::size_t>(j)] = j;

  // G = c * sum_{j alive} x_j x_j^T, downdated as coordinates freeze.
  Matrix g = c > 0.0 ? Matrix((x.transpose() * x) * c) : Matrix::Zero(d, d);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto pick = [&](std::size_t m) {
    return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, m - 1)(rng));
  };

  std::size_t pivot_slot = pick(alive.size());
  Assignment out;
  Vector u(n);

  while (!alive.empty()) {
    ++out.iterations;
    const Index pivot = alive[pivot_slot];
    // Step direction: 1 on the pivot; on the other live coordinates the
    // minimizer of || b_pivot + B v ||, computed in d dimensions via the
    // Woodbury identity on phi I + c X_A X_A^T.
    if (c > 0.0 && alive.size() > 1) {
      const Vector q = x.row(pivot).transpose();
      const Matrix ga = g - c * q * q.transpose();
      const Matrix m = Matrix::Identity(d, d) * phi + ga;
      const Vector h = m.ldlt().solve(ga * q);
      const Vector corr = (c / phi) * (q - h);
      for (std::size_t i = 0; i < alive.size(); ++i)
        u(alive[i]) = -x.row(alive[i]).dot(corr);
    } else {
      for (std::size_t i = 0; i < alive.size(); ++i) u(alive[i]) = 0.0;
    }
    u(pivot) = 1.0;

    // Largest steps keeping every live coordinate inside [-1, 1].
    double dplus = std::numeric_limits<double>::infinity();
    double dminus = std::numeric_limits<double>::infinity();
    for (Index j : alive) {
      const double uj = u(j);
      if (uj > 0.0) {
        dplus = std::min(dplus, (1.0 - z(j)) / uj);
        dminus = std::min(dminus, (1.0 + z(j)) / uj);
      } else if (uj < 0.0) {
        dplus = std::min(dplus, (-1.0 - z(j)) / uj);
        dminus = std::min(dminus, (z(j) - 1.0) / uj);
      }
    }
    const double delta = (unif(rng) < dminus / (dplus + dminus)) ? dplus : -dminus;
    for (Index j : alive) {
      z(j) += delta * u(j);
      out.max_abs_iterate = std::max(out.max_abs_iterate, std::abs(z(j)));
    }

    // Freeze everything that reached the boundary; snap exactly.
    bool pivot_froze = false;
    bool froze_any = false;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      const Index j = alive[i];
      if (std::abs(std::abs(z(j)) - 1.0) < detail::kFreezeTol) {
        z(j) = (z(j) > 0.0) ? 1.0 : -1.0;
        if (c > 0.0) g.noalias() -= c * x.row(j).transpose() * x.row(j);
        if (j == pivot) pivot_froze = true;
        froze_any = true;
      } else {
        alive[keep++] = j;
      }
    }
    alive.resize(keep);
    if (!froze_any) {
      // Round-off starved the boundary hit; force the nearest coordinate out.
      std::size_t best = 0;
      for (std::size_t i = 1; i < alive.size(); ++i)
        if (std::abs(z(alive[i])) > std::abs(z(alive[best]))) best = i;
      const Index j = alive[best];
      z(j) = (z(j) >= 0.0) ? 1.0 : -1.0;
      if (c > 0.0) g.noalias() -= c * x.row(j).transpose() * x.row(j);
      if (j == pivot) pivot_froze = true;
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best));
    }
    if (!alive.empty()) {
      if (pivot_froze) {
        pivot_slot = pick(alive.size());
      } else {
        for (std::size_t i = 0; i < alive.size(); ++i)
          if (alive[i] == pivot) pivot_slot = i;
      }
    }
  }

  out.z = z;
  for (Index j = 0; j < n; ++j)
    (z(j) > 0.0 ? out.s_plus : out.s_minus).push_back(j);
  return out;
}

inline Assignment gsw_assign(const CovariateMatrix& x, const GswParams& params, Rng& rng) {
  return gsw_assign(x.data, params, rng);
}

/// || X^T z ||, the covariate-sum gap between the two groups.
inline double imbalance(const Matrix& x, const Assignment& a) {
  if (a.z.size() != x.rows()) throw DimensionMismatch("imbalance: size mismatch");
  return (x.transpose() * a.z).norm();
}

inline double imbalance(const CovariateMatrix& x, const Assignment& a) {
  return imbalance(x.data, a);
}

/// Horvitz-Thompson estimate over one partition:
/// (2/n) (sum_{S+} y1 - sum_{S-} y0).
inline double ht_estimate(const Assignment& a, OutcomeOracle& oracle, Index n) {
  if (a.z.size() != n || oracle.n() != n)
    throw DimensionMismatch("ht_estimate: size mismatch");
  double acc = 0.0;
  for (Index j : a.s_plus) acc += oracle.read(j, Arm::treatment);
  for (Index j : a.s_minus) acc -= oracle.read(j, Arm::control);
  return 2.0 / static_cast<double>(n) * acc;
}

}  // namespace scte
