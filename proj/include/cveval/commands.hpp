#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cveval/bootstrap.hpp"
#include "cveval/dataset.hpp"
#include "cveval/estimator.hpp"
#include "cveval/synthetic.hpp"
#include "cveval/text_metrics.hpp"

namespace cveval::io {

enum class OutputFormat { csv, json };

// Everything the CLI subcommands need; unused fields are ignored per command.
struct RunConfig {
  std::string input;
  std::string metric = "rouge1";
  std::string prompt = "Overall";
  std::uint64_t seed = 0;
  double level = 0.80;
  std::size_t bootstrap_replicates = 1000;
  std::vector<std::size_t> n_grid;
  std::size_t reps_per_n = 10;
  std::string embeddings;
  std::string out;          // empty or "-" means stdout
  std::string scatter_out;  // correlate
  std::string svg_out;      // trajectory
  OutputFormat format = OutputFormat::json;
  bool per_judgment = false;  // treat each judgment as its own sample

  // plan
  double plan_sigma_f2 = 0.0;
  double plan_sigma_a2 = 0.0;
  double plan_rho = 0.0;
  double target_variance = 0.0;
};

// Metric scores for every record, in file order. `metric` is a built-in
// (rouge1|rouge2|rougeL|bleu|vecsim) or the name of a precomputed metric
// present on every record. Records without references score 0 on the
// built-ins.
std::vector<double> metric_values(const std::vector<DatasetRecord>& records,
                                  const std::string& metric,
                                  const text::EmbeddingTable* emb);

struct EstimateResult {
  std::string metric;
  std::string prompt;
  std::size_t n_records = 0;  // metric population size
  std::size_t n_sample = 0;   // judged sample size fed to the estimators
  EstimateReport cv;
  EstimateReport simple;
  ConfidenceInterval ci_cv;
  ConfidenceInterval ci_simple;
  std::optional<double> sigma_a2_hat;
  std::optional<double> sigma_f2_hat;
  std::optional<double> gamma_hat;
  std::optional<double> rho_hat;
  std::optional<double> de_theory;
  bool rho_clamped = false;
  double level = 0.80;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

EstimateResult run_estimate(const RunConfig& cfg);

struct CorrelationRow {
  std::string level;      // "instance" or "system"
  std::string system_id;  // "*" on the system-level row
  std::string metric;
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
};

struct ScatterRow {
  std::string item_id;
  std::string system_id;
  double metric = 0.0;
  double human = 0.0;
};

struct CorrelateResult {
  std::vector<CorrelationRow> rows;
  std::vector<ScatterRow> scatter;
};

CorrelateResult run_correlate(const RunConfig& cfg);

struct PlanResult {
  TheoryParams params;
  double target_variance = 0.0;
  std::size_t n = 0;
};

PlanResult run_plan(const RunConfig& cfg);

struct TrajectoryResult {
  std::vector<TrajectoryPoint> points;
  double empirical_de = 0.0;
  std::string csv;  // byte-stable rendering, footer row holds the DE
  std::string svg;  // nonempty iff svg_out was requested
};

TrajectoryResult run_trajectory(const RunConfig& cfg);

struct MetricRow {
  std::string item_id;
  std::string system_id;
  double value = 0.0;
};

std::vector<MetricRow> run_metrics(const RunConfig& cfg);

struct SimulateConfig {
  enum class Mode { variance, bias };
  Mode mode = Mode::variance;
  sim::GaussianWorldConfig world;
  sim::WorldEstimator estimator = sim::WorldEstimator::control_variates_oracle;
  std::size_t replicates = 200000;
  std::vector<std::size_t> n_list;  // bias mode
  double rel_err_tol = 0.03;
  double slope_lo = -1.25;
  double slope_hi = -0.75;
  std::optional<double> theory_override;  // testing hook for the exit path
};

struct SimulateResult {
  std::string report_json;
  bool ok = false;
};

SimulateResult run_simulate(const SimulateConfig& cfg);

// Rendering
std::string to_json(const EstimateResult& r);
std::string to_csv(const EstimateResult& r);
std::string report_json(const CorrelateResult& r);
std::string report_csv(const CorrelateResult& r);
std::string scatter_csv(const CorrelateResult& r);
std::string to_json(const PlanResult& r);
std::string to_csv(const PlanResult& r);
std::string metrics_json(const std::vector<MetricRow>& rows,
                         const std::string& metric);
std::string metrics_csv(const std::vector<MetricRow>& rows,
                        const std::string& metric);
std::string trajectory_svg(const std::vector<TrajectoryPoint>& points);

// Writes to the path, or to stdout when the path is empty or "-".
void write_text(const std::string& path, const std::string& content);

}  // namespace cveval::io
