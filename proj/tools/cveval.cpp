// Command-line front end: estimate | correlate | plan | trajectory |
// simulate | metrics. Exit codes: 0 success, 2 input error, 3 statistical
// degeneracy, 4 simulation tolerance failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cveval/commands.hpp"
#include "cveval/errors.hpp"

namespace {

using cveval::io::OutputFormat;
using cveval::io::RunConfig;

int exit_code(const cveval::Error& e) {
  return e.kind() == cveval::ErrorKind::input ? 2 : 3;
}

void add_common(CLI::App* cmd, RunConfig& cfg, bool needs_input = true) {
  auto* in = cmd->add_option("--input", cfg.input, "line-delimited JSON dataset");
  if (needs_input) in->required();
  cmd->add_option("--metric", cfg.metric,
                  "rouge1|rouge2|rougeL|bleu|vecsim or a precomputed name");
  cmd->add_option("--prompt", cfg.prompt, "judgment prompt to evaluate");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--level", cfg.level, "confidence level in (0,1)");
  cmd->add_option("--bootstrap", cfg.bootstrap_replicates,
                  "bootstrap replicates");
  cmd->add_option("--embeddings", cfg.embeddings,
                  "embedding file (token v1 ... vd per line)");
  cmd->add_option("--out", cfg.out, "output path ('-' = stdout)");
  std::map<std::string, OutputFormat> fmts{{"csv", OutputFormat::csv},
                                           {"json", OutputFormat::json}};
  cmd->add_option("--format", cfg.format, "csv|json")
      ->transform(CLI::CheckedTransformer(fmts, CLI::ignore_case));
  cmd->add_flag("--per-judgment", cfg.per_judgment,
                "treat each judgment as its own sample instead of "
                "collapsing to item means");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unbiased system evaluation with automatic-metric control "
               "variates"};
  app.require_subcommand(1);

  RunConfig cfg;
  cveval::io::SimulateConfig sim_cfg;
  std::string sim_mode = "variance";
  std::string sim_estimator = "control_variates_oracle";
  std::string sim_gdist = "gaussian";
  std::string sim_out;
  double sim_rho = 0.0;
  bool sim_rho_given = false;
  double theory_override = 0.0;
  bool theory_override_given = false;

  auto* est = app.add_subcommand("estimate",
                                 "control variates estimate with bootstrap CI");
  add_common(est, cfg);

  auto* cor = app.add_subcommand("correlate",
                                 "instance- and system-level correlations");
  add_common(cor, cfg);
  cor->add_option("--scatter", cfg.scatter_out, "scatter CSV path");

  auto* plan = app.add_subcommand("plan", "sample size for a target variance");
  plan->add_option("--sigma-f2", cfg.plan_sigma_f2, "Var f(z)")->required();
  plan->add_option("--sigma-a2", cfg.plan_sigma_a2, "annotator variance")
      ->required();
  plan->add_option("--rho", cfg.plan_rho, "metric-human correlation")
      ->required();
  plan->add_option("--target-variance", cfg.target_variance,
                   "target estimator variance")
      ->required();
  plan->add_option("--out", cfg.out, "output path ('-' = stdout)");
  std::map<std::string, OutputFormat> fmts{{"csv", OutputFormat::csv},
                                           {"json", OutputFormat::json}};
  plan->add_option("--format", cfg.format, "csv|json")
      ->transform(CLI::CheckedTransformer(fmts, CLI::ignore_case));

  auto* traj = app.add_subcommand(
      "trajectory", "CI width vs number of judgments, plus empirical DE");
  add_common(traj, cfg);
  traj->add_option("--n-grid", cfg.n_grid, "subsample sizes")
      ->required()
      ->delimiter(',');
  traj->add_option("--reps-per-n", cfg.reps_per_n,
                   "independent subsamples per grid point");
  traj->add_option("--svg", cfg.svg_out, "also write a line chart SVG");

  auto* sim = app.add_subcommand("simulate",
                                 "Monte Carlo checks of the estimator theory");
  sim->add_option("--mode", sim_mode, "variance|bias");
  sim->add_option("--mu", sim_cfg.world.mu, "true mean");
  sim->add_option("--sigma-f2", sim_cfg.world.sigma_f2, "Var f(z)");
  sim->add_option("--sigma-a2", sim_cfg.world.sigma_a2, "annotator variance");
  sim->add_option("--rho", sim_rho, "metric-human correlation")
      ->each([&](const std::string&) { sim_rho_given = true; });
  sim->add_option("--n", sim_cfg.world.n, "judgments per replicate");
  sim->add_option("--seed", sim_cfg.world.seed, "RNG seed");
  sim->add_option("--g-dist", sim_gdist,
                  "gaussian|exponential metric driver");
  sim->add_option("--estimator", sim_estimator,
                  "sample_mean|control_variates|control_variates_oracle");
  sim->add_option("--replicates", sim_cfg.replicates, "Monte Carlo replicates");
  sim->add_option("--n-list", sim_cfg.n_list, "bias-curve grid")
      ->delimiter(',');
  sim->add_option("--tol", sim_cfg.rel_err_tol, "relative error tolerance");
  sim->add_option("--slope-min", sim_cfg.slope_lo, "bias slope lower bound");
  sim->add_option("--slope-max", sim_cfg.slope_hi, "bias slope upper bound");
  sim->add_option("--theory-override", theory_override,
                  "replace the theoretical variance (exit-path testing)")
      ->each([&](const std::string&) { theory_override_given = true; });
  sim->add_option("--out", sim_out, "output path ('-' = stdout)");

  auto* met = app.add_subcommand("metrics", "per-record automatic metric scores");
  add_common(met, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*est) {
      const auto res = cveval::io::run_estimate(cfg);
      cveval::io::write_text(cfg.out, cfg.format == OutputFormat::json
                                          ? to_json(res)
                                          : to_csv(res));
    } else if (*cor) {
      const auto res = cveval::io::run_correlate(cfg);
      cveval::io::write_text(cfg.out, cfg.format == OutputFormat::json
                                          ? report_json(res)
                                          : report_csv(res));
      if (!cfg.scatter_out.empty())
        cveval::io::write_text(cfg.scatter_out, scatter_csv(res));
    } else if (*plan) {
      const auto res = cveval::io::run_plan(cfg);
      cveval::io::write_text(cfg.out, cfg.format == OutputFormat::json
                                          ? to_json(res)
                                          : to_csv(res));
    } else if (*traj) {
      const auto res = cveval::io::run_trajectory(cfg);
      cveval::io::write_text(cfg.out, res.csv);
      if (!cfg.svg_out.empty())
        cveval::io::write_text(cfg.svg_out, res.svg);
    } else if (*met) {
      const auto rows = cveval::io::run_metrics(cfg);
      cveval::io::write_text(cfg.out, cfg.format == OutputFormat::json
                                          ? metrics_json(rows, cfg.metric)
                                          : metrics_csv(rows, cfg.metric));
    } else if (*sim) {
      if (sim_mode == "variance") {
        sim_cfg.mode = cveval::io::SimulateConfig::Mode::variance;
      } else if (sim_mode == "bias") {
        sim_cfg.mode = cveval::io::SimulateConfig::Mode::bias;
      } else {
        std::cerr << "unknown --mode '" << sim_mode << "'\n";
        return 2;
      }
      if (sim_estimator == "sample_mean") {
        sim_cfg.estimator = cveval::sim::WorldEstimator::sample_mean;
      } else if (sim_estimator == "control_variates") {
        sim_cfg.estimator = cveval::sim::WorldEstimator::control_variates;
      } else if (sim_estimator == "control_variates_oracle") {
        sim_cfg.estimator = cveval::sim::WorldEstimator::control_variates_oracle;
      } else {
        std::cerr << "unknown --estimator '" << sim_estimator << "'\n";
        return 2;
      }
      if (sim_gdist == "gaussian") {
        sim_cfg.world.g_dist = cveval::sim::GDistribution::gaussian;
      } else if (sim_gdist == "exponential") {
        sim_cfg.world.g_dist = cveval::sim::GDistribution::centered_exponential;
      } else {
        std::cerr << "unknown --g-dist '" << sim_gdist << "'\n";
        return 2;
      }
      if (sim_rho_given) {
        if (std::abs(sim_rho) > 1.0) {
          std::cerr << "--rho must be in [-1, 1]\n";
          return 2;
        }
        sim_cfg.world.alpha = sim_rho * std::sqrt(sim_cfg.world.sigma_f2);
      }
      if (theory_override_given) sim_cfg.theory_override = theory_override;
      const auto res = cveval::io::run_simulate(sim_cfg);
      cveval::io::write_text(sim_out, res.report_json);
      if (!res.ok) return 4;
    }
  } catch (const cveval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
