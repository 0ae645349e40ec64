#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "scte/errors.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"

namespace scte {

enum class PlanMode { theory, budget };

struct SamplingPlan {
  Vector pi;
  PlanMode mode = PlanMode::budget;
  double epsilon = 0.0;
  double gamma = 0.0;
  double c0 = 1.0;
  double target_s = 0.0;      // budget mode
  double expected_total = 0;  // sum_j pi_j + pi_j (1 - pi_j)
  bool saturated = false;
};

struct SampleSets {
  std::vector<Index> s0;
  std::vector<Index> s1;  // post-removal: S1_raw \ S0
  std::vector<double> w0;  // 1/sqrt(pi_j)
  std::vector<double> w1;  // 1/sqrt(pi_j (1 - pi_j))
};

struct IteEstimate {
  Vector ite_hat;
  Vector beta1_hat;
  Vector beta0_hat;
  SampleSets sets;
  Index realized_sample_size = 0;
  bool degenerate = false;         // an empty regression set; beta forced to 0
  bool spectrum_fallback = false;  // gamma emptied the spectrum; top direction kept
};

/// epsilon = 120 c0 d log(d) / s.
inline double theory_epsilon(Index d, double s, double c0) {
  if (d < 2) throw InvalidDimension("theory_epsilon: d must be >= 2");
  if (s < 1.0 || c0 <= 0.0) throw InvalidDimension("theory_epsilon: need s >= 1, c0 > 0");
  return 120.0 * c0 * static_cast<double>(d) * std::log(static_cast<double>(d)) / s;
}

/// gamma = 4 c0 max{ log(rank_bound), 30/epsilon }.
inline double theory_gamma(Index rank_bound, double epsilon, double c0) {
  if (rank_bound < 2) throw InvalidDimension("theory_gamma: rank bound must be >= 2");
  if (epsilon <= 0.0) throw InvalidDimension("theory_gamma: epsilon must be > 0");
  return 4.0 * c0 * std::max(std::log(static_cast<double>(rank_bound)), 30.0 / epsilon);
}

inline double expected_total_draws(const Vector& pi) {
  return (pi.array() + pi.array() * (1.0 - pi.array())).sum();
}

/// pi_j = min{1, l_j c0 (log(rank) + 30/epsilon)}, leverage taken on X*.
inline SamplingPlan theory_probabilities(const LeverageProfile& lev, double epsilon,
                                         double c0) {
  if (epsilon <= 0.0 || c0 <= 0.0)
    throw InvalidDimension("theory_probabilities: need epsilon > 0, c0 > 0");
  const double rank = std::max<double>(1.0, static_cast<double>(lev.source_rank));
  const double factor = c0 * (std::log(rank) + 30.0 / epsilon);
  SamplingPlan plan;
  plan.mode = PlanMode::theory;
  plan.epsilon = epsilon;
  plan.c0 = c0;
  plan.pi = (lev.scores.array() * factor).min(1.0).matrix();
  plan.expected_total = expected_total_draws(plan.pi);
  return plan;
}

/// pi_j = min{1/2, lambda l_j}, lambda chosen by bisection so the expected
/// total over both draws matches s. If every uncapped coordinate saturates
/// first the capped plan is returned with the saturation flag set.
inline SamplingPlan budget_probabilities(const LeverageProfile& lev, double s) {
  const Vector& l = lev.scores;
  if (s < 0.0) throw InvalidDimension("budget_probabilities: s < 0");
  SamplingPlan plan;
  plan.mode = PlanMode::budget;
  plan.target_s = s;
  if (s == 0.0) {
    plan.pi = Vector::Zero(l.size());
    return plan;
  }
  const double mass = l.sum();
  if (mass <= 0.0) throw ZeroLeverage("budget_probabilities: all leverage scores are zero");

  auto total_at = [&](double lambda) {
    double t = 0.0;
    for (Index j = 0; j < l.size(); ++j) {
      const double p = std::min(0.5, lambda * l(j));
      t += p + p * (1.0 - p);
    }
    return t;
  };

  // Saturation ceiling: every positive-leverage coordinate capped at 1/2.
  double ceiling = 0.0;
  for (Index j = 0; j < l.size(); ++j)
    if (l(j) > 0.0) ceiling += 0.75;
  if (ceiling <= s * (1.0 - 1e-12)) {
    plan.pi = Vector::Zero(l.size());
    for (Index j = 0; j < l.size(); ++j)
      if (l(j) > 0.0) plan.pi(j) = 0.5;
    plan.expected_total = expected_total_draws(plan.pi);
    plan.saturated = true;
    return plan;
  }

  double lo = 0.0, hi = 1.0;
  while (total_at(hi) < s) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_at(mid) < s)
      lo = mid;
    else
      hi = mid;
    if (std::abs(total_at(hi) - s) <= 1e-9 * s) break;
  }
  plan.pi = (l.array() * hi).min(0.5).matrix();
  plan.expected_total = expected_total_draws(plan.pi);
  return plan;
}

/// Two independent Bernoulli passes; duplicates are removed from S1.
inline SampleSets draw_sample_sets(const SamplingPlan& plan, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index n = plan.pi.size();
  SampleSets sets;
  std::vector<bool> in_s0(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < n; ++j) {
    if (unif(rng) < plan.pi(j)) {
      in_s0[static_cast<std::size_t>(j)] = true;
      sets.s0.push_back(j);
      sets.w0.push_back(1.0 / std::sqrt(plan.pi(j)));
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (unif(rng) < plan.pi(j) && !in_s0[static_cast<std::size_t>(j)]) {
      sets.s1.push_back(j);
      sets.w1.push_back(1.0 / std::sqrt(plan.pi(j) * (1.0 - plan.pi(j))));
    }
  }
  return sets;
}

struct TheoryInputs {
  double epsilon;
  double c0 = 1.0;
};
struct BudgetInputs {
  double s;
  double c0 = 1.0;
};
using PlanInputs = std::variant<TheoryInputs, BudgetInputs>;

namespace detail {

inline Vector weighted_regression(const Matrix& xs, const std::vector<Index>& rows,
                                  const std::vector<double>& w, OutcomeOracle& oracle,
                                  Arm arm, bool* degenerate) {
  if (rows.empty()) {
    *degenerate = true;
    return Vector::Zero(xs.cols());
  }
  Matrix a(static_cast<Index>(rows.size()), xs.cols());
  Vector b(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.row(static_cast<Index>(i)) = w[i] * xs.row(rows[i]);
    b(static_cast<Index>(i)) = w[i] * oracle.read(rows[i], arm);
  }
  return min_norm_least_squares(a, b);
}

}  // namespace detail

/// The sampling-and-regression core of Algorithm 1, run against an explicit
/// design matrix and sampling plan. Used directly by the uniform and
/// unsmoothed baselines.
inline IteEstimate sampling_ite_with_plan(const Matrix& design, const SamplingPlan& plan,
                                          OutcomeOracle& oracle, Rng& rng) {
  if (plan.pi.size() != design.rows() || oracle.n() != design.rows())
    throw DimensionMismatch("sampling_ite_with_plan: size mismatch");
  IteEstimate est;
  est.sets = draw_sample_sets(plan, rng);
  est.beta0_hat = detail::weighted_regression(design, est.sets.s0, est.sets.w0, oracle,
                                              Arm::control, &est.degenerate);
  est.beta1_hat = detail::weighted_regression(design, est.sets.s1, est.sets.w1, oracle,
                                              Arm::treatment, &est.degenerate);
  est.ite_hat = design * (est.beta1_hat - est.beta0_hat);
  est.realized_sample_size = static_cast<Index>(est.sets.s0.size() + est.sets.s1.size());
  return est;
}

/// Sampling-ITE. Builds the smoothed matrix, draws the two disjoint sample
/// sets, solves the reweighted regressions for each arm and returns
/// X* beta1 - X* beta0. If the theory gamma exceeds the full spectrum the
/// top singular direction is retained and the fallback flag set.
inline IteEstimate sampling_ite(const CovariateMatrix& x, const PlanInputs& inputs,
                                OutcomeOracle& oracle, Rng& rng) {
  const Index n = x.n();
  const Index d = x.d();
  if (oracle.n() != n) throw DimensionMismatch("sampling_ite: oracle size != n");

  double c0 = 1.0, epsilon = 0.0;
  if (std::holds_alternative<TheoryInputs>(inputs)) {
    c0 = std::get<TheoryInputs>(inputs).c0;
    epsilon = std::get<TheoryInputs>(inputs).epsilon;
    if (d < 2) throw InvalidDimension("sampling_ite: theory mode needs d >= 2");
  } else {
    c0 = std::get<BudgetInputs>(inputs).c0;
    if (d >= 2) epsilon = theory_epsilon(d, std::get<BudgetInputs>(inputs).s, c0);
  }

  IteEstimate est;
  double gamma = (d >= 2) ? theory_gamma(d, epsilon, c0) : 0.0;
  SmoothedMatrix xs;
  try {
    xs = smoothed_matrix(x.data, gamma);
  } catch (const EmptySpectrum&) {
    // Degenerate threshold at desk scale: keep the top direction. The tiny
    // shrink keeps sigma_1 itself above the sqrt/square round trip.
    Eigen::BDCSVD<Matrix> dec(x.data);
    const double s1 = dec.singularValues()(0);
    xs = smoothed_matrix(x.data, s1 * s1 * (1.0 - 1e-12));
    est.spectrum_fallback = true;
  }

  LeverageProfile lev;
  lev.source_rank = detail::numerical_rank(xs.singular_values, n, d);
  lev.scores = xs.U.leftCols(std::max<Index>(lev.source_rank, 0)).rowwise().squaredNorm();

  SamplingPlan plan = std::holds_alternative<TheoryInputs>(inputs)
                          ? theory_probabilities(lev, epsilon, c0)
                          : budget_probabilities(lev, std::get<BudgetInputs>(inputs).s);
  plan.gamma = gamma;

  const bool fallback = est.spectrum_fallback;
  est = sampling_ite_with_plan(xs.matrix, plan, oracle, rng);
  est.spectrum_fallback = fallback;
  return est;
}

/// (1/sqrt(n)) || ite_hat - (y1 - y0) ||.
inline double rmse(const Vector& ite_hat, const Vector& y1, const Vector& y0) {
  if (ite_hat.size() != y1.size() || y1.size() != y0.size())
    throw DimensionMismatch("rmse: length mismatch");
  if (ite_hat.size() < 1) throw DimensionMismatch("rmse: empty input");
  return (ite_hat - (y1 - y0)).norm() / std::sqrt(static_cast<double>(ite_hat.size()));
}

}  // namespace scte
