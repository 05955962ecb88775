#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cveval {

// Affine map x -> (x - mean) / std fitted on the full population of metric
// values, so the transformed metric has zero mean and unit variance there.
// Population moments (divide by N): the metric is free to evaluate on the
// whole output set, unlike the human judgments.
struct MetricStandardization {
  double mean;
  double std;

  MetricStandardization(double mean, double std);

  double operator()(double x) const { return (x - mean) / std; }
  std::vector<double> apply(std::span<const double> xs) const;
};

MetricStandardization fit_standardization(std::span<const double> g_population);

// n human judgments paired with the standardized metric on the same outputs.
struct PairedSample {
  std::vector<double> y;
  std::vector<double> g;

  PairedSample(std::vector<double> y, std::vector<double> g);
  std::size_t size() const { return y.size(); }
};

enum class EstimatorMethod {
  sample_mean,
  control_variates,
  control_variates_oracle,
};

const char* to_string(EstimatorMethod m);

struct EstimateReport {
  double mu_hat = 0.0;
  double alpha_hat = 0.0;
  std::size_t n = 0;
  std::optional<double> variance_est;  // plug-in variance of mu_hat, if n >= 2
  EstimatorMethod method = EstimatorMethod::sample_mean;
};

// mu_hat = mean(y). Unbiased baseline.
EstimateReport sample_mean(std::span<const double> y);

// Plug-in control variates:
//   ybar  = mean(y)
//   ahat  = (1/n) sum_i (y_i - ybar) g_i
//   mu    = (1/n) sum_i (y_i - ahat g_i)
// The 1/n covariance (not 1/(n-1)) is deliberate; n = 1 degenerates to
// ahat = 0, mu = y_1.
EstimateReport control_variates(const PairedSample& sample);

// Same estimator with a fixed coefficient: mu = (1/n) sum (y_i - alpha g_i).
// Exactly unbiased for any fixed alpha; used by the theory-verification
// suites where the true covariance is known.
EstimateReport control_variates_oracle(const PairedSample& sample,
                                       double alpha);

// Population-level quantities describing an evaluation setting:
//   sigma_f2 = Var f(z), sigma_a2 = E_z Var(Y(z)), rho = corr(f, g),
//   alpha = rho * sigma_f (g has unit variance), gamma = sigma_a2 / sigma_f2.
struct TheoryParams {
  double mu = 0.0;
  double sigma_f2 = 0.0;
  double sigma_a2 = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  std::optional<double> gamma;  // absent when sigma_f2 == 0

  static TheoryParams from_rho(double mu, double sigma_f2, double sigma_a2,
                               double rho);
};

// (sigma_f2 + sigma_a2) / n
double variance_simple(const TheoryParams& params, std::size_t n);

// (sigma_f2 (1 - rho^2) + sigma_a2) / n
double variance_control(const TheoryParams& params, std::size_t n);

// (1 + gamma) / (1 - rho^2 + gamma); +infinity at rho^2 = 1, gamma = 0.
double data_efficiency(double rho, double gamma);

// Smallest n with variance_control(params, n) <= target_variance, at least 1.
std::size_t plan_sample_size(const TheoryParams& params,
                             double target_variance);

}  // namespace cveval
