#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "helpers.hpp"
#include "scte/scte.hpp"

using namespace scte;

namespace {

std::pair<CovariateMatrix, PotentialOutcomes> small_instance(Index n, Index d,
                                                             std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.d = d;
  spec.sigma = 1.0 / std::sqrt(static_cast<double>(d));
  spec.seed = seed;
  Rng rng = make_rng(seed);
  return gen_synthetic(spec, rng);
}

}  // namespace

TEST_CASE("percentile: interpolation on 1..100") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile(v, 0.30) == doctest::Approx(30.7));
  CHECK(percentile(v, 0.70) == doctest::Approx(70.3));
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 1.0) == 100.0);
  CHECK(percentile({5.0}, 0.3) == 5.0);
  CHECK(percentile({1.0, 3.0}, 0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(percentile({}, 0.5), EmptyInput);
}

TEST_CASE("run_ite_experiment: record layout and counts") {
  auto [x, po] = small_instance(60, 3, 11);
  ExperimentConfig cfg;
  cfg.task = Task::ite;
  cfg.fractions = {0.5, 1.0};
  cfg.trials = 4;
  cfg.master_seed = 9;
  ExperimentResult res = run_ite_experiment(x, po, cfg);
  CHECK(res.records.size() + static_cast<std::size_t>(res.degenerate_trials) ==
        ite_method_names().size() * 2 * 4);
  // Canonical ordering: method blocks, then fraction blocks, then trials.
  std::size_t idx = 0;
  for (const auto& rec : res.records) {
    CHECK(rec.metric == "rmse");
    CHECK(rec.value >= 0.0);
    CHECK((rec.fraction == 0.5 || rec.fraction == 1.0));
    ++idx;
  }
  for (std::size_t i = 0; i + 1 < res.records.size(); ++i) {
    if (res.records[i].method == res.records[i + 1].method &&
        res.records[i].fraction == res.records[i + 1].fraction)
      CHECK(res.records[i].trial < res.records[i + 1].trial);
  }
  // Lin-regression is full-information: sample size n on every record.
  for (const auto& rec : res.records)
    if (rec.method == "Lin-regression") CHECK(rec.sample_size == 60);
}

TEST_CASE("run_ite_experiment: deterministic and jobs-invariant") {
  auto [x, po] = small_instance(50, 3, 21);
  ExperimentConfig cfg;
  cfg.task = Task::ite;
  cfg.fractions = {0.4, 0.8};
  cfg.trials = 3;
  cfg.master_seed = 77;
  cfg.jobs = 1;
  ExperimentResult a = run_ite_experiment(x, po, cfg);
  cfg.jobs = 4;
  ExperimentResult b = run_ite_experiment(x, po, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].method == b.records[i].method);
    CHECK(a.records[i].trial == b.records[i].trial);
    CHECK(a.records[i].value == b.records[i].value);  // bit-identical
    CHECK(a.records[i].sample_size == b.records[i].sample_size);
  }
  cfg.master_seed = 78;
  cfg.jobs = 1;
  ExperimentResult c = run_ite_experiment(x, po, cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < std::min(a.records.size(), c.records.size()); ++i)
    if (a.records[i].value != c.records[i].value) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("run_ate_experiment: full-population methods replicated across fractions") {
  auto [x, po] = small_instance(40, 3, 31);
  ExperimentConfig cfg;
  cfg.task = Task::ate;
  cfg.fractions = {0.25, 0.5, 1.0};
  cfg.trials = 5;
  cfg.master_seed = 13;
  ExperimentResult res = run_ate_experiment(x, po, cfg);
  CHECK(res.records.size() + static_cast<std::size_t>(res.degenerate_trials) ==
        ate_method_names().size() * 3 * 5);
  // GSW-pop and Complete-randomization: per-trial values equal across fractions.
  for (const std::string& m : {std::string("GSW-pop"), std::string("Complete-randomization")}) {
    std::map<int, std::vector<double>> by_trial;
    for (const auto& rec : res.records)
      if (rec.method == m) by_trial[rec.trial].push_back(rec.value);
    for (const auto& [t, vals] : by_trial) {
      REQUIRE(vals.size() == 3);
      CHECK(vals[0] == vals[1]);
      CHECK(vals[1] == vals[2]);
    }
  }
  // Subset methods actually vary with the fraction (sample sizes differ).
  std::map<double, Index> uniform_sizes;
  for (const auto& rec : res.records)
    if (rec.method == "Uniform") uniform_sizes[rec.fraction] = rec.sample_size;
  CHECK(uniform_sizes[0.25] == 10);
  CHECK(uniform_sizes[1.0] == 40);
  for (const auto& rec : res.records) CHECK(rec.metric == "deviation");
}

TEST_CASE("run_ate_experiment: deterministic and jobs-invariant") {
  auto [x, po] = small_instance(30, 2, 41);
  ExperimentConfig cfg;
  cfg.task = Task::ate;
  cfg.fractions = {0.5, 1.0};
  cfg.trials = 4;
  cfg.master_seed = 5;
  cfg.jobs = 1;
  ExperimentResult a = run_ate_experiment(x, po, cfg);
  cfg.jobs = 3;
  ExperimentResult b = run_ate_experiment(x, po, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(a.records[i].value == b.records[i].value);
}

TEST_CASE("run_experiment: method filter and bad labels") {
  auto [x, po] = small_instance(30, 2, 51);
  ExperimentConfig cfg;
  cfg.task = Task::ate;
  cfg.methods = {"Uniform"};
  cfg.fractions = {0.5};
  cfg.trials = 3;
  ExperimentResult res = run_experiment(x, po, cfg);
  CHECK(res.records.size() == 3);
  for (const auto& rec : res.records) CHECK(rec.method == "Uniform");
  cfg.methods = {"Leverage"};  // an ITE label, invalid for the ATE task
  CHECK_THROWS(run_experiment(x, po, cfg));
}

TEST_CASE("summarize: hand-checked aggregation") {
  std::vector<TrialRecord> recs;
  for (int t = 0; t < 100; ++t)
    recs.push_back(TrialRecord{"M", 0.5, t, "rmse", static_cast<double>(t + 1), 10});
  recs.push_back(TrialRecord{"M", 1.0, 0, "rmse", 7.0, 20});
  auto rows = summarize(recs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "M");
  CHECK(rows[0].fraction == 0.5);
  CHECK(rows[0].mean == doctest::Approx(50.5));
  CHECK(rows[0].p30 == doctest::Approx(30.7));
  CHECK(rows[0].p70 == doctest::Approx(70.3));
  CHECK(rows[0].mean_sample_size == doctest::Approx(10.0));
  CHECK(rows[0].trial_count == 100);
  CHECK(rows[1].fraction == 1.0);
  CHECK(rows[1].mean == 7.0);
  CHECK(rows[1].trial_count == 1);
  CHECK_THROWS_AS(summarize({}), EmptyInput);
}

TEST_CASE("records CSV: round trip and header check") {
  auto [x, po] = small_instance(25, 2, 61);
  ExperimentConfig cfg;
  cfg.task = Task::ate;
  cfg.fractions = {0.5};
  cfg.trials = 2;
  ExperimentResult res = run_ate_experiment(x, po, cfg);
  const auto path = std::filesystem::temp_directory_path() / "scte_records.csv";
  save_records(path.string(), res.records);
  auto back = load_records(path.string());
  REQUIRE(back.size() == res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].method == res.records[i].method);
    CHECK(back[i].fraction == res.records[i].fraction);
    CHECK(back[i].trial == res.records[i].trial);
    CHECK(back[i].metric == res.records[i].metric);
    CHECK(back[i].value == res.records[i].value);  // 17-digit round trip
    CHECK(back[i].sample_size == res.records[i].sample_size);
  }
  // Summaries from saved rows match summaries from in-memory rows.
  auto r1 = summarize(res.records);
  auto r2 = summarize(back);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].mean == r2[i].mean);
    CHECK(r1[i].p30 == r2[i].p30);
  }
  std::filesystem::remove(path);

  const auto bad = std::filesystem::temp_directory_path() / "scte_bad_records.csv";
  {
    std::ofstream f(bad);
    f << "wrong,header\n";
  }
  CHECK_THROWS_AS(load_records(bad.string()), ParseError);
  std::filesystem::remove(bad);
}

TEST_CASE("summary CSV: documented header and row shape") {
  std::vector<SummaryRow> rows = {{"M", 0.5, 1.5, 1.0, 2.0, 12.5, 8}};
  const auto path = std::filesystem::temp_directory_path() / "scte_summary.csv";
  save_summary(path.string(), rows);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "method,fraction,mean,p30,p70,mean_sample_size,trial_count");
  CHECK(row == "M,0.5,1.5,1,2,12.5,8");
  std::filesystem::remove(path);
}

TEST_CASE("ITE sweep: sampling error decays as the budget grows") {
  auto [x, po] = small_instance(300, 8, 71);
  ExperimentConfig cfg;
  cfg.task = Task::ite;
  cfg.methods = {"Leverage-nothresh"};
  cfg.fractions = {0.1, 1.0};
  cfg.trials = 100;
  cfg.master_seed = 3;
  ExperimentResult res = run_ite_experiment(x, po, cfg);
  auto rows = summarize(res.records);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].mean < rows[0].mean);
}
