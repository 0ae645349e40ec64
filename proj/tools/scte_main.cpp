// Command-line front end: generate synthetic data, inspect leverage
// profiles, run single designs, run Monte Carlo experiments, summarize
// record files.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate design.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scte/scte.hpp"

namespace {

struct CommonOpts {
  std::optional<std::uint64_t> seed;
  std::string x_path;
  std::string y_path;
  bool header = false;
  std::optional<double> shift;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed.has_value()) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

scte::Dataset load(const CommonOpts& c) {
  return scte::load_dataset(c.x_path, c.y_path, c.header, c.shift);
}

void log_kv(const std::string& key, const std::string& value) {
  std::cerr << "# " << key << " = " << value << "\n";
}

// "n=100" style key=value parameters for `gen`.
struct GenParams {
  scte::Index n = 100;
  scte::Index d = 5;
  std::optional<double> sigma;
};

void apply_gen_param(GenParams& p, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw CLI::ValidationError("gen", "expected key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  if (key == "n")
    p.n = std::stoll(val);
  else if (key == "d")
    p.d = std::stoll(val);
  else if (key == "sigma")
    p.sigma = std::stod(val);
  else
    throw CLI::ValidationError("gen", "unknown parameter '" + key + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"Sample-constrained treatment-effect experimental designs"};
  app.require_subcommand(1);
  app.set_config("--config");

  // ---- gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  std::vector<std::string> gen_params;
  bool synthetic = false;
  std::string out_x = "x.csv", out_y = "y.csv";
  std::optional<std::uint64_t> gen_seed;
  bool gen_header = false;
  gen->add_flag("--synthetic", synthetic, "Synthetic recipe (multivariate t(1) covariates)");
  gen->add_option("params", gen_params, "key=value parameters: n=, d=, sigma=");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--out-x", out_x, "Covariates CSV path")->capture_default_str();
  gen->add_option("--out-y", out_y, "Outcomes CSV path")->capture_default_str();
  gen->add_flag("--header", gen_header, "Write a header line in the covariates CSV");

  // ---- leverage
  auto* lev = app.add_subcommand("leverage", "Print the leverage profile of a covariate file");
  std::string lev_x, lev_out;
  bool lev_header = false;
  lev->add_option("--x", lev_x, "Covariates CSV")->required();
  lev->add_flag("--header", lev_header, "Covariates CSV has a header line");
  lev->add_option("--out", lev_out, "Output path (default: stdout)");

  // ---- design-ite
  auto* dite = app.add_subcommand("design-ite", "One Sampling-ITE run");
  CommonOpts dite_c;
  std::string dite_mode = "budget";
  double dite_fraction = 0.2, dite_c0 = 1.0;
  std::optional<double> dite_s, dite_eps;
  std::string dite_out;
  dite->add_option("--x", dite_c.x_path, "Covariates CSV")->required();
  dite->add_option("--y", dite_c.y_path, "Outcomes CSV")->required();
  dite->add_flag("--header", dite_c.header, "Covariates CSV has a header line");
  dite->add_option("--shift", dite_c.shift, "Constant treatment effect for y0-only files");
  dite->add_option("--mode", dite_mode, "theory | budget")->check(CLI::IsMember({"theory", "budget"}))->capture_default_str();
  dite->add_option("--fraction", dite_fraction, "Expected sample size as fraction of n")->capture_default_str();
  dite->add_option("--s", dite_s, "Expected sample size (overrides --fraction)");
  dite->add_option("--epsilon", dite_eps, "Theory-mode accuracy parameter");
  dite->add_option("--c0", dite_c0, "Sampling constant")->capture_default_str();
  dite->add_option("--seed", dite_c.seed, "Master seed");
  dite->add_option("--out", dite_out, "Write the estimated ITE vector to this CSV");

  // ---- design-ate
  auto* date = app.add_subcommand("design-ate", "One ATE design run");
  CommonOpts date_c;
  std::string date_method = "Recursive-GSW";
  double date_fraction = 0.3, date_phi = 0.5;
  std::optional<scte::Index> date_s;
  date->add_option("--x", date_c.x_path, "Covariates CSV")->required();
  date->add_option("--y", date_c.y_path, "Outcomes CSV")->required();
  date->add_flag("--header", date_c.header, "Covariates CSV has a header line");
  date->add_option("--shift", date_c.shift, "Constant treatment effect for y0-only files");
  date->add_option("--method", date_method, "Recursive-GSW | Uniform | GSW-pop | Complete-randomization")
      ->check(CLI::IsMember(scte::ate_method_names()))
      ->capture_default_str();
  date->add_option("--fraction", date_fraction, "Budget as fraction of n")->capture_default_str();
  date->add_option("--s", date_s, "Budget in units (overrides --fraction)");
  date->add_option("--phi", date_phi, "GSW robustness parameter")->capture_default_str();
  date->add_option("--seed", date_c.seed, "Master seed");

  // ---- experiment {ite|ate}
  auto* exp = app.add_subcommand("experiment", "Monte Carlo sweep over sample fractions");
  exp->require_subcommand(1);
  CommonOpts exp_c;
  scte::ExperimentConfig cfg;
  std::string exp_out = "records.csv", exp_summary;
  std::optional<std::uint64_t> exp_seed;
  std::string exp_mode = "budget";
  auto add_exp_common = [&](CLI::App* sub) {
    sub->add_option("--x", exp_c.x_path, "Covariates CSV")->required();
    sub->add_option("--y", exp_c.y_path, "Outcomes CSV")->required();
    sub->add_flag("--header", exp_c.header, "Covariates CSV has a header line");
    sub->add_option("--shift", exp_c.shift, "Constant treatment effect for y0-only files");
    sub->add_option("--fractions", cfg.fractions, "Sample fractions")->delimiter(',')->capture_default_str();
    sub->add_option("--trials", cfg.trials, "Trials per (method, fraction)")->capture_default_str();
    sub->add_option("--methods", cfg.methods, "Subset of method labels")->delimiter(',');
    sub->add_option("--seed", exp_seed, "Master seed");
    sub->add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
    sub->add_option("--out", exp_out, "Records CSV path")->capture_default_str();
    sub->add_option("--summary", exp_summary, "Also write a summary CSV here");
  };
  auto* exp_ite = exp->add_subcommand("ite", "RMSE of ITE estimates");
  add_exp_common(exp_ite);
  exp_ite->add_option("--c0", cfg.c0, "Sampling constant")->capture_default_str();
  exp_ite->add_option("--mode", exp_mode, "theory | budget")->check(CLI::IsMember({"theory", "budget"}))->capture_default_str();
  exp_ite->add_flag("--literal-uniform", cfg.literal_uniform,
                    "Uniform baseline uses pi = s/n verbatim");
  auto* exp_ate = exp->add_subcommand("ate", "Deviation |tau_hat - tau|");
  add_exp_common(exp_ate);
  exp_ate->add_option("--phi", cfg.phi, "GSW robustness parameter")->capture_default_str();

  // ---- summarize
  auto* summ = app.add_subcommand("summarize", "Aggregate a records CSV");
  std::string summ_in, summ_out = "summary.csv";
  summ->add_option("--in", summ_in, "Records CSV")->required();
  summ->add_option("--out", summ_out, "Summary CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  if (gen->parsed()) {
    GenParams p;
    for (const auto& kv : gen_params) apply_gen_param(p, kv);
    const double sigma = p.sigma.value_or(1.0 / std::sqrt(static_cast<double>(p.d)));
    const std::uint64_t seed = resolve_seed(gen_seed);
    log_kv("subcommand", "gen");
    log_kv("n", std::to_string(p.n));
    log_kv("d", std::to_string(p.d));
    log_kv("sigma", scte::format_double(sigma));
    log_kv("seed", std::to_string(seed));
    scte::SyntheticSpec spec{p.n, p.d, sigma, 2.0, 0.5, seed};
    scte::Rng rng = scte::make_rng(scte::derive_seed(seed));
    auto [x, po] = scte::gen_synthetic(spec, rng);
    scte::save_dataset(out_x, out_y, x, po, gen_header);
    std::cerr << "# wrote " << out_x << " and " << out_y << "\n";
    return 0;
  }

  if (lev->parsed()) {
    log_kv("subcommand", "leverage");
    const scte::Matrix x = scte::load_covariates(lev_x, lev_header);
    const scte::LeverageProfile profile = scte::leverage_scores(x);
    std::ostringstream body;
    for (scte::Index j = 0; j < profile.scores.size(); ++j)
      body << scte::format_double(profile.scores(j)) << '\n';
    if (lev_out.empty()) {
      std::cout << body.str();
    } else {
      std::ofstream out(lev_out);
      if (!out) throw scte::ParseError("cannot open for writing: " + lev_out);
      out << body.str();
    }
    std::cerr << "# rank = " << profile.source_rank << "\n";
    return 0;
  }

  if (dite->parsed()) {
    const std::uint64_t seed = resolve_seed(dite_c.seed);
    log_kv("subcommand", "design-ite");
    log_kv("mode", dite_mode);
    log_kv("seed", std::to_string(seed));
    scte::Dataset ds = load(dite_c);
    const double s = dite_s.value_or(dite_fraction * static_cast<double>(ds.x.n()));
    log_kv("s", scte::format_double(s));
    scte::Rng rng = scte::make_rng(scte::derive_seed(seed));
    scte::OutcomeOracle oracle(ds.outcomes);
    scte::IteEstimate est;
    if (dite_mode == "theory") {
      const double eps = dite_eps.value_or(scte::theory_epsilon(ds.x.d(), s, dite_c0));
      log_kv("epsilon", scte::format_double(eps));
      est = scte::sampling_ite(ds.x, scte::TheoryInputs{eps, dite_c0}, oracle, rng);
    } else {
      est = scte::sampling_ite(ds.x, scte::BudgetInputs{s, dite_c0}, oracle, rng);
    }
    std::cout << "realized_sample_size," << est.realized_sample_size << "\n";
    std::cout << "rmse," << scte::format_double(scte::rmse(est.ite_hat, ds.outcomes.y1,
                                                           ds.outcomes.y0))
              << "\n";
    std::cout << "degenerate," << (est.degenerate ? 1 : 0) << "\n";
    if (!dite_out.empty()) {
      std::ofstream out(dite_out);
      if (!out) throw scte::ParseError("cannot open for writing: " + dite_out);
      out << "ite_hat\n";
      for (scte::Index j = 0; j < est.ite_hat.size(); ++j)
        out << scte::format_double(est.ite_hat(j)) << '\n';
    }
    return 0;
  }

  if (date->parsed()) {
    const std::uint64_t seed = resolve_seed(date_c.seed);
    log_kv("subcommand", "design-ate");
    log_kv("method", date_method);
    log_kv("seed", std::to_string(seed));
    scte::Dataset ds = load(date_c);
    const scte::Index n = ds.x.n();
    const scte::Index s = date_s.value_or(std::max<scte::Index>(
        1, static_cast<scte::Index>(std::llround(date_fraction * static_cast<double>(n)))));
    log_kv("s", std::to_string(s));
    scte::Rng rng = scte::make_rng(scte::derive_seed(seed));
    scte::OutcomeOracle oracle(ds.outcomes);
    const scte::GswParams params{date_phi, 8};
    scte::AteEstimate est;
    if (date_method == "Recursive-GSW") {
      const auto design = scte::recursive_balance(ds.x, s, params, rng);
      est = scte::recursive_estimate(design, oracle, n);
      log_kv("depth", std::to_string(design.depth_k));
      log_kv("delta_prime", scte::format_double(design.delta_prime));
    } else if (date_method == "Uniform") {
      est = scte::uniform_ate(s, oracle, rng, n);
    } else if (date_method == "GSW-pop") {
      est = scte::gsw_pop_ate(ds.x, params, oracle, rng);
    } else {
      est = scte::complete_randomization_ate(oracle, rng, n);
    }
    const double tau = (ds.outcomes.y1 - ds.outcomes.y0).mean();
    std::cout << "tau_hat," << scte::format_double(est.tau_hat) << "\n";
    std::cout << "tau," << scte::format_double(tau) << "\n";
    std::cout << "deviation," << scte::format_double(std::abs(est.tau_hat - tau)) << "\n";
    std::cout << "realized_sample_size," << est.realized_sample_size << "\n";
    return 0;
  }

  if (exp->parsed()) {
    cfg.task = exp_ite->parsed() ? scte::Task::ite : scte::Task::ate;
    cfg.theory_mode = exp_mode == "theory";
    cfg.master_seed = resolve_seed(exp_seed);
    log_kv("subcommand", exp_ite->parsed() ? "experiment ite" : "experiment ate");
    log_kv("seed", std::to_string(cfg.master_seed));
    log_kv("trials", std::to_string(cfg.trials));
    log_kv("jobs", std::to_string(cfg.jobs));
    scte::Dataset ds = load(exp_c);
    const scte::ExperimentResult result = scte::run_experiment(ds.x, ds.outcomes, cfg);
    scte::save_records(exp_out, result.records);
    std::cerr << "# records = " << result.records.size()
              << ", degenerate_trials = " << result.degenerate_trials << "\n";
    if (!exp_summary.empty()) scte::save_summary(exp_summary, scte::summarize(result.records));
    return 0;
  }

  if (summ->parsed()) {
    log_kv("subcommand", "summarize");
    scte::save_summary(summ_out, scte::summarize(scte::load_records(summ_in)));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const scte::DegeneratePartition& e) {
    std::cerr << "degenerate design: " << e.what() << "\n";
    return 3;
  } catch (const scte::EmptySpectrum& e) {
    std::cerr << "degenerate design: " << e.what() << "\n";
    return 3;
  } catch (const scte::ZeroCovariates& e) {
    std::cerr << "degenerate design: " << e.what() << "\n";
    return 3;
  } catch (const scte::ZeroLeverage& e) {
    std::cerr << "degenerate design: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
