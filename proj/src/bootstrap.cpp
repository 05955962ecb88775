#include "cveval/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cveval/errors.hpp"
#include "cveval/rng.hpp"

namespace cveval {

namespace {

// stream-domain tags so the resampling, subsampling and inner-bootstrap
// draws never collide
constexpr std::uint64_t kResample = 0x626f6f74;   // "boot"
constexpr std::uint64_t kSubsample = 0x73756273;  // "subs"
constexpr std::uint64_t kInnerSeed = 0x696e6e72;  // "innr"

void validate(const BootstrapConfig& cfg) {
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw Error(ErrorKind::input, "bootstrap level must be in (0, 1)");
  if (cfg.replicates < 2)
    throw Error(ErrorKind::input, "bootstrap needs >= 2 replicates");
}

double apply_estimator(BootstrapEstimator est, const PairedSample& s) {
  switch (est) {
    case BootstrapEstimator::sample_mean:
      return sample_mean(s.y).mu_hat;
    case BootstrapEstimator::control_variates:
      return control_variates(s).mu_hat;
  }
  return 0.0;
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

ConfidenceInterval bootstrap_ci(BootstrapEstimator estimator,
                                const PairedSample& sample,
                                const BootstrapConfig& cfg) {
  validate(cfg);
  const std::size_t n = sample.size();
  std::vector<double> values(cfg.replicates);
  PairedSample resample = sample;  // shape buffer, overwritten per replicate
  for (std::size_t b = 0; b < cfg.replicates; ++b) {
    auto rng = Xoshiro256pp::stream(cfg.seed, {kResample, b});
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.below(n));
      resample.y[i] = sample.y[j];
      resample.g[i] = sample.g[j];
    }
    values[b] = apply_estimator(estimator, resample);
  }
  std::sort(values.begin(), values.end());
  const double q = (1.0 - cfg.level) / 2.0;
  ConfidenceInterval ci;
  ci.lo = quantile_sorted(values, q);
  ci.hi = quantile_sorted(values, 1.0 - q);
  ci.width = ci.hi - ci.lo;
  return ci;
}

std::vector<TrajectoryPoint> trajectory(const PairedSample& data,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t reps_per_n,
                                        const BootstrapConfig& cfg) {
  validate(cfg);
  if (reps_per_n < 1)
    throw Error(ErrorKind::input, "reps_per_n must be >= 1");
  const std::size_t total = data.size();
  for (std::size_t n : n_grid) {
    if (n < 1 || n > total)
      throw GridExceedsData("grid point " + std::to_string(n) +
                            " outside [1, " + std::to_string(total) + "]");
  }

  std::vector<std::size_t> indices(total);
  std::vector<TrajectoryPoint> out;
  out.reserve(n_grid.size());
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    PairedSample sub(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
    double ws = 0.0, wc = 0.0;
    for (std::size_t rep = 0; rep < reps_per_n; ++rep) {
      auto rng = Xoshiro256pp::stream(cfg.seed, {kSubsample, gi, rep});
      std::iota(indices.begin(), indices.end(), std::size_t{0});
      for (std::size_t i = 0; i < n; ++i) {  // partial Fisher-Yates
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(indices[i], indices[j]);
        sub.y[i] = data.y[indices[i]];
        sub.g[i] = data.g[indices[i]];
      }
      BootstrapConfig inner = cfg;
      inner.seed = hash_stream(cfg.seed, {kInnerSeed, gi, rep});
      ws += bootstrap_ci(BootstrapEstimator::sample_mean, sub, inner).width;
      wc += bootstrap_ci(BootstrapEstimator::control_variates, sub, inner).width;
    }
    const double reps = static_cast<double>(reps_per_n);
    out.push_back(TrajectoryPoint{n, ws / reps, wc / reps});
  }
  return out;
}

double empirical_data_efficiency(const std::vector<TrajectoryPoint>& traj) {
  if (traj.empty()) throw EmptySample("trajectory is empty");
  double acc = 0.0;
  for (const auto& p : traj) {
    if (!(p.width_cv > 0.0))
      throw ZeroWidth("control-variates CI width is zero at n = " +
                      std::to_string(p.n));
    const double r = p.width_simple / p.width_cv;
    acc += r * r;
  }
  return acc / static_cast<double>(traj.size());
}

}  // namespace cveval
