#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "scte/ate.hpp"
#include "scte/csv.hpp"
#include "scte/errors.hpp"
#include "scte/ite.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"

namespace scte {

enum class Task { ite, ate };

struct ExperimentConfig {
  Task task = Task::ite;
  std::vector<std::string> methods;  // empty = all methods for the task
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int trials = 1000;
  std::uint64_t master_seed = 0;
  double phi = 0.5;
  double c0 = 1.0;
  bool literal_uniform = false;  // ITE Uniform baseline uses pi = s/n verbatim
  bool theory_mode = false;      // ITE Leverage uses theory probabilities
  int jobs = 1;
};

struct TrialRecord {
  std::string method;
  double fraction = 0.0;
  int trial = 0;
  std::string metric;  // "rmse" | "deviation"
  double value = 0.0;
  Index sample_size = 0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered method -> fraction -> trial
  Index degenerate_trials = 0;
};

struct SummaryRow {
  std::string method;
  double fraction = 0.0;
  double mean = 0.0;
  double p30 = 0.0;
  double p70 = 0.0;
  double mean_sample_size = 0.0;
  Index trial_count = 0;
};

inline const std::vector<std::string>& ite_method_names() {
  static const std::vector<std::string> names = {"Leverage", "Uniform", "Leverage-nothresh",
                                                 "Lin-regression"};
  return names;
}

inline const std::vector<std::string>& ate_method_names() {
  static const std::vector<std::string> names = {"Recursive-GSW", "Uniform", "GSW-pop",
                                                 "Complete-randomization"};
  return names;
}

/// Linear interpolation between order statistics at h = 1 + (n-1) p.
inline double percentile(std::vector<double> sorted_values, double p) {
  if (sorted_values.empty()) throw EmptyInput("percentile: no values");
  const std::size_t n = sorted_values.size();
  if (n == 1) return sorted_values[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac;
}

namespace detail {

inline std::vector<std::string> resolve_methods(const ExperimentConfig& cfg) {
  if (!cfg.methods.empty()) {
    const auto& valid = cfg.task == Task::ite ? ite_method_names() : ate_method_names();
    for (const auto& m : cfg.methods)
      if (std::find(valid.begin(), valid.end(), m) == valid.end())
        throw InvalidDimension("unknown method label: " + m);
    return cfg.methods;
  }
  return cfg.task == Task::ite ? ite_method_names() : ate_method_names();
}

// Runs fn(flat_index) over [0, total) on cfg.jobs threads.
inline void parallel_for(Index total, int jobs, const std::function<void(Index)>& fn) {
  if (jobs <= 1) {
    for (Index i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= total) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline ExperimentResult run_ite_experiment(const CovariateMatrix& x,
                                           const PotentialOutcomes& outcomes,
                                           const ExperimentConfig& cfg) {
  if (outcomes.n() != x.n()) throw DimensionMismatch("run_ite_experiment: size mismatch");
  const std::vector<std::string> methods = detail::resolve_methods(cfg);
  const Index n = x.n();
  const Vector true_ite = outcomes.y1 - outcomes.y0;

  const Index total = static_cast<Index>(methods.size() * cfg.fractions.size()) * cfg.trials;
  std::vector<std::optional<TrialRecord>> slots(static_cast<std::size_t>(total));
  std::atomic<Index> degenerate{0};

  const Index per_method = static_cast<Index>(cfg.fractions.size()) * cfg.trials;
  detail::parallel_for(total, cfg.jobs, [&](Index flat) {
    const Index mi = flat / per_method;
    const Index fi = (flat % per_method) / cfg.trials;
    const int trial = static_cast<int>(flat % cfg.trials);
    const std::string& method = methods[static_cast<std::size_t>(mi)];
    const double fraction = cfg.fractions[static_cast<std::size_t>(fi)];
    const double s = fraction * static_cast<double>(n);
    Rng rng = make_rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(mi),
                                   static_cast<std::uint64_t>(fi),
                                   static_cast<std::uint64_t>(trial)));
    TrialRecord rec{method, fraction, trial, "rmse", 0.0, 0};
    if (method == "Lin-regression") {
      // Full-information oracle baseline; reads both arms by construction.
      const Vector b1 = min_norm_least_squares(x.data, outcomes.y1);
      const Vector b0 = min_norm_least_squares(x.data, outcomes.y0);
      rec.value = rmse(x.data * (b1 - b0), outcomes.y1, outcomes.y0);
      rec.sample_size = n;
    } else {
      OutcomeOracle oracle(outcomes);
      IteEstimate est;
      if (method == "Leverage") {
        if (cfg.theory_mode) {
          const double eps = theory_epsilon(x.d(), s, cfg.c0);
          est = sampling_ite(x, TheoryInputs{eps, cfg.c0}, oracle, rng);
        } else {
          est = sampling_ite(x, BudgetInputs{s, cfg.c0}, oracle, rng);
        }
      } else if (method == "Uniform") {
        SamplingPlan plan;
        if (cfg.literal_uniform) {
          plan.pi = Vector::Constant(n, std::min(1.0, s / static_cast<double>(n)));
          plan.expected_total = expected_total_draws(plan.pi);
        } else {
          LeverageProfile flat_lev{Vector::Ones(n), 1};
          plan = budget_probabilities(flat_lev, s);
        }
        est = sampling_ite_with_plan(x.data, plan, oracle, rng);
      } else {  // Leverage-nothresh: Algorithm 1 on X itself
        SamplingPlan plan = budget_probabilities(leverage_scores(x), s);
        est = sampling_ite_with_plan(x.data, plan, oracle, rng);
      }
      if (est.degenerate) {
        degenerate.fetch_add(1);
        return;
      }
      rec.value = rmse(est.ite_hat, outcomes.y1, outcomes.y0);
      rec.sample_size = est.realized_sample_size;
    }
    slots[static_cast<std::size_t>(flat)] = std::move(rec);
  });

  ExperimentResult result;
  result.degenerate_trials = degenerate.load();
  result.records.reserve(static_cast<std::size_t>(total));
  for (auto& slot : slots)
    if (slot.has_value()) result.records.push_back(std::move(*slot));
  return result;
}

inline ExperimentResult run_ate_experiment(const CovariateMatrix& x,
                                           const PotentialOutcomes& outcomes,
                                           const ExperimentConfig& cfg) {
  if (outcomes.n() != x.n()) throw DimensionMismatch("run_ate_experiment: size mismatch");
  const std::vector<std::string> methods = detail::resolve_methods(cfg);
  const Index n = x.n();
  const double tau = (outcomes.y1 - outcomes.y0).mean();
  const GswParams params{cfg.phi, 8};

  const Index total = static_cast<Index>(methods.size() * cfg.fractions.size()) * cfg.trials;
  std::vector<std::optional<TrialRecord>> slots(static_cast<std::size_t>(total));
  std::atomic<Index> degenerate{0};

  auto full_population = [](const std::string& m) {
    return m == "GSW-pop" || m == "Complete-randomization";
  };

  const Index per_method = static_cast<Index>(cfg.fractions.size()) * cfg.trials;
  detail::parallel_for(total, cfg.jobs, [&](Index flat) {
    const Index mi = flat / per_method;
    const Index fi = (flat % per_method) / cfg.trials;
    const int trial = static_cast<int>(flat % cfg.trials);
    const std::string& method = methods[static_cast<std::size_t>(mi)];
    // Full-population methods ignore the sample fraction: one draw per
    // trial, replicated across fractions afterwards.
    if (full_population(method) && fi != 0) return;
    const double fraction = cfg.fractions[static_cast<std::size_t>(fi)];
    const Index s = std::max<Index>(1, static_cast<Index>(std::llround(
                                           fraction * static_cast<double>(n))));
    Rng rng = make_rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(mi),
                                   full_population(method) ? 0u : static_cast<std::uint64_t>(fi),
                                   static_cast<std::uint64_t>(trial)));
    OutcomeOracle oracle(outcomes);
    AteEstimate est;
    try {
      if (method == "Recursive-GSW") {
        RecursiveDesign design = recursive_balance(x, s, params, rng);
        est = recursive_estimate(design, oracle, n);
      } else if (method == "Uniform") {
        est = uniform_ate(s, oracle, rng, n);
      } else if (method == "GSW-pop") {
        est = gsw_pop_ate(x, params, oracle, rng);
      } else {  // Complete-randomization
        est = complete_randomization_ate(oracle, rng, n);
      }
    } catch (const DegeneratePartition&) {
      degenerate.fetch_add(1);
      return;
    }
    slots[static_cast<std::size_t>(flat)] =
        TrialRecord{method,           fraction, trial, "deviation", std::abs(est.tau_hat - tau),
                    est.realized_sample_size};
  });

  // Replicate the full-population draws across fractions.
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    if (!full_population(methods[mi])) continue;
    for (std::size_t fi = 1; fi < cfg.fractions.size(); ++fi) {
      for (int t = 0; t < cfg.trials; ++t) {
        const Index src = static_cast<Index>(mi) * per_method + t;
        const Index dst =
            static_cast<Index>(mi) * per_method + static_cast<Index>(fi) * cfg.trials + t;
        if (slots[static_cast<std::size_t>(src)].has_value()) {
          TrialRecord rec = *slots[static_cast<std::size_t>(src)];
          rec.fraction = cfg.fractions[fi];
          slots[static_cast<std::size_t>(dst)] = std::move(rec);
        }
      }
    }
  }

  ExperimentResult result;
  result.degenerate_trials = degenerate.load();
  for (auto& slot : slots)
    if (slot.has_value()) result.records.push_back(std::move(*slot));
  return result;
}

inline ExperimentResult run_experiment(const CovariateMatrix& x,
                                       const PotentialOutcomes& outcomes,
                                       const ExperimentConfig& cfg) {
  return cfg.task == Task::ite ? run_ite_experiment(x, outcomes, cfg)
                               : run_ate_experiment(x, outcomes, cfg);
}

inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw EmptyInput("summarize: no records");
  // Group by (method, fraction) in order of first appearance.
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  std::vector<std::vector<double>> values;
  std::vector<double> size_sums;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.method, r.fraction);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, rows.size()).first;
      rows.push_back(SummaryRow{r.method, r.fraction, 0, 0, 0, 0, 0});
      values.emplace_back();
      size_sums.push_back(0.0);
    }
    values[it->second].push_back(r.value);
    size_sums[it->second] += static_cast<double>(r.sample_size);
    ++rows[it->second].trial_count;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& v = values[i];
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    rows[i].mean = sum / static_cast<double>(v.size());
    rows[i].p30 = percentile(v, 0.30);
    rows[i].p70 = percentile(v, 0.70);
    rows[i].mean_sample_size = size_sums[i] / static_cast<double>(v.size());
  }
  return rows;
}

// ---- record / summary CSV, per the documented headers.

inline std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::string out = "method,fraction,trial,metric,value,sample_size\n";
  for (const auto& r : records) {
    out += r.method;
    out += ',';
    out += format_double(r.fraction);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += std::to_string(r.sample_size);
    out += '\n';
  }
  return out;
}

inline void save_records(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << records_to_csv(records);
}

inline std::vector<TrialRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty records file: " + path);
  if (detail::strip_cr(line) != "method,fraction,trial,metric,value,sample_size")
    throw ParseError("unexpected records header: " + line);
  std::vector<TrialRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw ParseError("expected 6 columns at line " + std::to_string(lineno + 1));
    TrialRecord r;
    r.method = f[0];
    r.fraction = detail::parse_field(f[1], lineno, 1);
    r.trial = static_cast<int>(detail::parse_field(f[2], lineno, 2));
    r.metric = f[3];
    r.value = detail::parse_field(f[4], lineno, 4);
    r.sample_size = static_cast<Index>(detail::parse_field(f[5], lineno, 5));
    records.push_back(std::move(r));
    ++lineno;
  }
  return records;
}

inline void save_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "method,fraction,mean,p30,p70,mean_sample_size,trial_count\n";
  for (const auto& r : rows)
    out << r.method << ',' << format_double(r.fraction) << ',' << format_double(r.mean) << ','
        << format_double(r.p30) << ',' << format_double(r.p70) << ','
        << format_double(r.mean_sample_size) << ',' << r.trial_count << '\n';
}

}  // namespace scte
