#include "cveval/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cveval/errors.hpp"

namespace cveval {

namespace {

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

MetricStandardization::MetricStandardization(double mean, double std)
    : mean(mean), std(std) {
  if (!(std > 0.0)) throw DegenerateMetric("standardization requires std > 0");
}

std::vector<double> MetricStandardization::apply(
    std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((*this)(x));
  return out;
}

MetricStandardization fit_standardization(std::span<const double> g_population) {
  if (g_population.size() < 2)
    throw EmptyPopulation("need at least 2 metric values to standardize");
  const double m = mean_of(g_population);
  double ss = 0.0;
  for (double x : g_population) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(g_population.size());
  if (var <= 1e-15)
    throw DegenerateMetric("metric is (numerically) constant; "
                           "control variates cannot help");
  return MetricStandardization(m, std::sqrt(var));
}

PairedSample::PairedSample(std::vector<double> y_in, std::vector<double> g_in)
    : y(std::move(y_in)), g(std::move(g_in)) {
  if (y.empty()) throw EmptySample("paired sample is empty");
  if (y.size() != g.size())
    throw LengthMismatch("judgments and metric values differ in length");
}

const char* to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::sample_mean: return "sample_mean";
    case EstimatorMethod::control_variates: return "control_variates";
    case EstimatorMethod::control_variates_oracle:
      return "control_variates_oracle";
  }
  return "?";
}

EstimateReport sample_mean(std::span<const double> y) {
  if (y.empty()) throw EmptySample("sample_mean of an empty sample");
  EstimateReport r;
  r.method = EstimatorMethod::sample_mean;
  r.n = y.size();
  r.mu_hat = mean_of(y);
  r.alpha_hat = 0.0;
  if (y.size() >= 2) {
    double ss = 0.0;
    for (double v : y) ss += (v - r.mu_hat) * (v - r.mu_hat);
    const double n = static_cast<double>(y.size());
    r.variance_est = ss / (n - 1.0) / n;
  }
  return r;
}

namespace {

EstimateReport shifted_estimate(const PairedSample& s, double alpha,
                                EstimatorMethod method) {
  const double n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.y[i] - alpha * s.g[i];
  EstimateReport r;
  r.method = method;
  r.n = s.size();
  r.alpha_hat = alpha;
  r.mu_hat = acc / n;
  if (s.size() >= 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = s.y[i] - alpha * s.g[i] - r.mu_hat;
      ss += d * d;
    }
    r.variance_est = ss / (n - 1.0) / n;
  }
  return r;
}

}  // namespace

EstimateReport control_variates(const PairedSample& sample) {
  const double n = static_cast<double>(sample.size());
  const double ybar = mean_of(sample.y);
  double cov = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i)
    cov += (sample.y[i] - ybar) * sample.g[i];
  const double alpha_hat = cov / n;
  return shifted_estimate(sample, alpha_hat,
                          EstimatorMethod::control_variates);
}

EstimateReport control_variates_oracle(const PairedSample& sample,
                                       double alpha) {
  if (!std::isfinite(alpha))
    throw RhoOutOfRange("oracle alpha must be finite");
  return shifted_estimate(sample, alpha,
                          EstimatorMethod::control_variates_oracle);
}

TheoryParams TheoryParams::from_rho(double mu, double sigma_f2,
                                    double sigma_a2, double rho) {
  if (sigma_f2 < 0.0 || sigma_a2 < 0.0)
    throw NegativeGamma("variance components must be nonnegative");
  if (!(std::abs(rho) <= 1.0)) throw RhoOutOfRange("|rho| must be <= 1");
  TheoryParams p;
  p.mu = mu;
  p.sigma_f2 = sigma_f2;
  p.sigma_a2 = sigma_a2;
  p.rho = rho;
  p.alpha = rho * std::sqrt(sigma_f2);
  if (sigma_f2 > 0.0) p.gamma = sigma_a2 / sigma_f2;
  return p;
}

double variance_simple(const TheoryParams& params, std::size_t n) {
  if (n == 0) throw ZeroN("variance at n = 0");
  return (params.sigma_f2 + params.sigma_a2) / static_cast<double>(n);
}

double variance_control(const TheoryParams& params, std::size_t n) {
  if (n == 0) throw ZeroN("variance at n = 0");
  if (!(std::abs(params.rho) <= 1.0))
    throw RhoOutOfRange("|rho| must be <= 1");
  const double rho2 = params.rho * params.rho;
  return (params.sigma_f2 * (1.0 - rho2) + params.sigma_a2) /
         static_cast<double>(n);
}

double data_efficiency(double rho, double gamma) {
  if (!(std::abs(rho) <= 1.0)) throw RhoOutOfRange("|rho| must be <= 1");
  if (!(gamma >= 0.0)) throw NegativeGamma("gamma must be >= 0");
  const double denom = 1.0 - rho * rho + gamma;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + gamma) / denom;
}

std::size_t plan_sample_size(const TheoryParams& params,
                             double target_variance) {
  if (!(target_variance > 0.0))
    throw NonpositiveTarget("target variance must be > 0");
  const double rho2 = params.rho * params.rho;
  const double numer = params.sigma_f2 * (1.0 - rho2) + params.sigma_a2;
  if (numer <= 0.0) return 1;
  // Guard against FP noise pushing an exact quotient just above an integer.
  const double q = numer / target_variance;
  const double n = std::ceil(q * (1.0 - 8.0 * std::numeric_limits<double>::epsilon()));
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

}  // namespace cveval
