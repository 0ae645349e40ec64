#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "scte/errors.hpp"
#include "scte/gsw.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"

namespace scte {

struct RecursiveLevel {
  std::vector<Index> subset;  // global indices partitioned at this level
  Assignment assignment;      // local to `subset`
};

struct RecursiveDesign {
  std::vector<RecursiveLevel> chain;
  Index depth_k = 0;
  std::vector<Index> final_plus;   // global indices
  std::vector<Index> final_minus;  // global indices
  double scale = 0.0;              // 2^depth_k
  double delta_prime = 0.0;        // log(16 log(n/s)), recorded for reporting only
};

struct AteEstimate {
  double tau_hat = 0.0;
  std::string method;
  Index realized_sample_size = 0;
  Index depth = 0;
};

/// Recursive covariate balancing: split with the walk, recurse on the
/// smaller side (ties go to the minus side) until at most s units remain.
/// Reads no outcomes.
inline RecursiveDesign recursive_balance(const CovariateMatrix& x, Index s,
                                         const GswParams& params, Rng& rng) {
  const Index n = x.n();
  if (n < 1 || s < 1) throw InvalidDimension("recursive_balance: need n >= 1, s >= 1");

  RecursiveDesign design;
  design.delta_prime =
      (n > s) ? std::log(16.0 * std::log(static_cast<double>(n) / static_cast<double>(s)))
              : 0.0;

  std::vector<Index> current(static_cast<std::size_t>(n));
  std::iota(current.begin(), current.end(), Index{0});

  while (true) {
    Matrix sub(static_cast<Index>(current.size()), x.d());
    for (std::size_t i = 0; i < current.size(); ++i)
      sub.row(static_cast<Index>(i)) = x.data.row(current[i]);

    const Index nt = static_cast<Index>(current.size());
    Assignment a;
    std::vector<Index> plus, minus;
    for (int attempt = 0;; ++attempt) {
      a = gsw_assign(sub, params, rng);
      plus.clear();
      minus.clear();
      for (Index j : a.s_plus) plus.push_back(current[static_cast<std::size_t>(j)]);
      for (Index j : a.s_minus) minus.push_back(current[static_cast<std::size_t>(j)]);
      if (nt <= s || (!plus.empty() && !minus.empty())) break;
      if (attempt + 1 >= params.max_retries)
        throw DegeneratePartition("recursive_balance: walk kept returning one-sided splits");
    }
    design.chain.push_back(RecursiveLevel{current, a});
    ++design.depth_k;

    if (nt <= s) {
      design.final_plus = plus;
      design.final_minus = minus;
      break;
    }
    current = (plus.size() >= minus.size()) ? std::move(minus) : std::move(plus);
  }
  design.scale = std::ldexp(1.0, static_cast<int>(design.depth_k));
  return design;
}

/// tau_hat = 2^k / n (sum_{Z+_k} y1 - sum_{Z-_k} y0).
inline AteEstimate recursive_estimate(const RecursiveDesign& design, OutcomeOracle& oracle,
                                      Index n) {
  double acc = 0.0;
  for (Index j : design.final_plus) acc += oracle.read(j, Arm::treatment);
  for (Index j : design.final_minus) acc -= oracle.read(j, Arm::control);
  AteEstimate est;
  est.method = "Recursive-GSW";
  est.tau_hat = design.scale / static_cast<double>(n) * acc;
  est.realized_sample_size = oracle.revealed_count();
  est.depth = design.depth_k;
  return est;
}

/// Uniform size-s subset, fair coin per sampled unit,
/// tau_hat = (2/s)(sum_T y1 - sum_C y0).
inline AteEstimate uniform_ate(Index s, OutcomeOracle& oracle, Rng& rng, Index n) {
  if (s < 1 || s > n) throw InvalidDimension("uniform_ate: need 1 <= s <= n");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  // Partial Fisher-Yates: only the first s slots are needed.
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double acc = 0.0;
  for (Index i = 0; i < s; ++i) {
    const Index j = perm[static_cast<std::size_t>(i)];
    if (unif(rng) < 0.5)
      acc += oracle.read(j, Arm::treatment);
    else
      acc -= oracle.read(j, Arm::control);
  }
  AteEstimate est;
  est.method = "Uniform";
  est.tau_hat = 2.0 / static_cast<double>(s) * acc;
  est.realized_sample_size = oracle.revealed_count();
  est.depth = 0;
  return est;
}

/// Fair coin per unit over the whole population; Horvitz-Thompson.
inline AteEstimate complete_randomization_ate(OutcomeOracle& oracle, Rng& rng, Index n) {
  if (n < 1) throw InvalidDimension("complete_randomization_ate: empty population");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (unif(rng) < 0.5)
      acc += oracle.read(j, Arm::treatment);
    else
      acc -= oracle.read(j, Arm::control);
  }
  AteEstimate est;
  est.method = "Complete-randomization";
  est.tau_hat = 2.0 / static_cast<double>(n) * acc;
  est.realized_sample_size = oracle.revealed_count();
  est.depth = 0;
  return est;
}

/// One walk over the full population, then Horvitz-Thompson.
inline AteEstimate gsw_pop_ate(const CovariateMatrix& x, const GswParams& params,
                               OutcomeOracle& oracle, Rng& rng) {
  Assignment a = gsw_assign(x, params, rng);
  AteEstimate est;
  est.method = "GSW-pop";
  est.tau_hat = ht_estimate(a, oracle, x.n());
  est.realized_sample_size = oracle.revealed_count();
  est.depth = 1;
  return est;
}

}  // namespace scte
