#pragma once

#include <cstdint>
#include <vector>

#include "cveval/gaussian_linalg.hpp"

namespace cveval::sim {

// Distribution of the metric driver. Worlds stay exactly on the stated
// second moments either way; the centered exponential (zero mean, unit
// variance, third moment 2) is the one that gives the plug-in estimator a
// measurable O(1/n) bias. A jointly Gaussian world has all third central
// moments equal to zero, which makes the plug-in estimator exactly unbiased
// and leaves the bias-rate check with nothing to measure.
enum class GDistribution { gaussian, centered_exponential };

// A synthetic evaluation world:
//   g = e1                              (zero mean, unit variance)
//   f = mu + alpha e1 + sqrt(sigma_f2 - alpha^2) e2
//   y = f + sqrt(sigma_a2) e3
// so Cov(f, g) = alpha, Var f = sigma_f2, E_z Var(Y|z) = sigma_a2.
struct GaussianWorldConfig {
  double mu = 0.0;
  double sigma_f2 = 1.0;
  double sigma_a2 = 0.0;
  double alpha = 0.0;  // alpha^2 <= sigma_f2
  std::size_t n = 1;   // judgments per replicate
  std::uint64_t seed = 0;
  GDistribution g_dist = GDistribution::gaussian;
};

struct WorldDraw {
  std::vector<double> f, g, y;
};

WorldDraw sample_world(const GaussianWorldConfig& cfg);

enum class WorldEstimator {
  sample_mean,
  control_variates,         // plug-in alpha-hat
  control_variates_oracle,  // fixed alpha from the config
};

struct VarianceCheck {
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double empirical_se = 0.0;  // standard error of empirical_var
  double theory_var = 0.0;
  double rel_err = 0.0;  // |emp - theory| / theory, absolute when theory = 0
  std::size_t replicates = 0;
};

// Monte Carlo check of the closed-form estimator variance. Replicate r draws
// from stream (seed, r); partial sums are combined in fixed block order, so
// the result is bit-identical for any thread count (0 = hardware default).
VarianceCheck verify_estimator_variance(const GaussianWorldConfig& cfg,
                                        WorldEstimator estimator,
                                        std::size_t replicates,
                                        unsigned threads = 0);

struct BiasPoint {
  std::size_t n = 0;
  double bias = 0.0;  // mean(mu_hat) - mu
  double se = 0.0;    // standard error of the bias estimate
};

struct BiasCurve {
  std::vector<BiasPoint> points;
  double loglog_slope = 0.0;  // least-squares slope of log|bias| vs log n
};

BiasCurve bias_curve(const GaussianWorldConfig& cfg,
                     const std::vector<std::size_t>& n_list,
                     std::size_t replicates,
                     WorldEstimator estimator = WorldEstimator::control_variates,
                     unsigned threads = 0);

// Draws y_uv = x_u + w_v + r_uv for the two-factor model; entry i of the
// result is the response of row i of the assignment matrices.
std::vector<double> sample_two_factor(const linalg::TwoFactorConfig& cfg,
                                      std::uint64_t seed);

}  // namespace cveval::sim
