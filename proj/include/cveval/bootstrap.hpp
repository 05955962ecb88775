#pragma once

#include <cstdint>
#include <vector>

#include "cveval/estimator.hpp"

namespace cveval {

struct BootstrapConfig {
  double level = 0.80;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
};

enum class BootstrapEstimator { sample_mean, control_variates };

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
};

// Percentile bootstrap over B resamples of (y_i, g_i) pairs drawn with
// replacement. Quantiles interpolate linearly between order statistics.
// Replicate b draws from the stream (seed, b), so results are identical no
// matter how replicates are scheduled.
ConfidenceInterval bootstrap_ci(BootstrapEstimator estimator,
                                const PairedSample& sample,
                                const BootstrapConfig& cfg);

struct TrajectoryPoint {
  std::size_t n = 0;
  double width_simple = 0.0;
  double width_cv = 0.0;
};

// For each n in the grid: average, over reps_per_n subsamples drawn without
// replacement, the bootstrap CI width of both estimators. Both estimators
// see the same resamples, which keeps their width ratio stable.
std::vector<TrajectoryPoint> trajectory(const PairedSample& data,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t reps_per_n,
                                        const BootstrapConfig& cfg);

// mean over points of (width_simple / width_cv)^2
double empirical_data_efficiency(const std::vector<TrajectoryPoint>& traj);

// Linear-interpolation quantile of an ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace cveval
