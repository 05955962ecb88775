#include "cveval/synthetic.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "cveval/errors.hpp"
#include "cveval/estimator.hpp"
#include "cveval/rng.hpp"

namespace cveval::sim {

namespace {

constexpr std::uint64_t kVarianceTag = 0x766172;  // "var"
constexpr std::uint64_t kBiasTag = 0x62696173;    // "bias"
constexpr std::size_t kBlock = 4096;

void validate(const GaussianWorldConfig& cfg) {
  if (cfg.sigma_f2 < 0.0 || cfg.sigma_a2 < 0.0)
    throw NotPSD("variance components must be nonnegative");
  if (cfg.alpha * cfg.alpha > cfg.sigma_f2 * (1.0 + 1e-12) + 1e-300)
    throw NotPSD("alpha^2 exceeds sigma_f2; covariance not PSD");
  if (cfg.n == 0) throw ZeroN("world needs n >= 1 judgments");
}

void draw_into(const GaussianWorldConfig& cfg, Xoshiro256pp& rng,
               std::vector<double>& f, std::vector<double>& g,
               std::vector<double>& y) {
  const double beta =
      std::sqrt(std::max(0.0, cfg.sigma_f2 - cfg.alpha * cfg.alpha));
  const double sa = std::sqrt(cfg.sigma_a2);
  const bool exp_driver = cfg.g_dist == GDistribution::centered_exponential;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double e1 = exp_driver ? rng.centered_exponential() : rng.normal();
    const double e2 = rng.normal();
    const double e3 = rng.normal();
    g[i] = e1;
    f[i] = cfg.mu + cfg.alpha * e1 + beta * e2;
    y[i] = f[i] + sa * e3;
  }
}

double evaluate(WorldEstimator est, const GaussianWorldConfig& cfg,
                PairedSample& buf) {
  switch (est) {
    case WorldEstimator::sample_mean:
      return sample_mean(buf.y).mu_hat;
    case WorldEstimator::control_variates:
      return control_variates(buf).mu_hat;
    case WorldEstimator::control_variates_oracle:
      return control_variates_oracle(buf, cfg.alpha).mu_hat;
  }
  return 0.0;
}

// Power sums of (value - center); center is the true mu so the sums stay
// well conditioned.
struct PowerSums {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::size_t count = 0;

  void add(double d) {
    const double d2 = d * d;
    s1 += d;
    s2 += d2;
    s3 += d2 * d;
    s4 += d2 * d2;
    ++count;
  }
  void merge(const PowerSums& o) {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    count += o.count;
  }
};

// Runs `total` replicates split into fixed blocks; blocks may be computed by
// any thread but are merged in index order, so the reduction is independent
// of scheduling.
template <typename PerReplicate>
PowerSums run_replicates(std::size_t total, unsigned threads,
                         PerReplicate per_replicate) {
  const std::size_t n_blocks = (total + kBlock - 1) / kBlock;
  std::vector<PowerSums> blocks(n_blocks);
  unsigned n_threads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (n_threads == 0) n_threads = 1;
  n_threads = static_cast<unsigned>(
      std::min<std::size_t>(n_threads, n_blocks));

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t bi = next.fetch_add(1);
      if (bi >= n_blocks) return;
      PowerSums acc;
      const std::size_t lo = bi * kBlock;
      const std::size_t hi = std::min(total, lo + kBlock);
      for (std::size_t r = lo; r < hi; ++r) acc.add(per_replicate(r));
      blocks[bi] = acc;
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    for (unsigned t = 0; t < n_threads; ++t)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& fu : futs) fu.get();
  }

  PowerSums all;
  for (const auto& b : blocks) all.merge(b);
  return all;
}

TheoryParams theory_of(const GaussianWorldConfig& cfg) {
  const double rho =
      cfg.sigma_f2 > 0.0 ? cfg.alpha / std::sqrt(cfg.sigma_f2) : 0.0;
  return TheoryParams::from_rho(cfg.mu, cfg.sigma_f2, cfg.sigma_a2, rho);
}

}  // namespace

WorldDraw sample_world(const GaussianWorldConfig& cfg) {
  validate(cfg);
  WorldDraw d;
  d.f.resize(cfg.n);
  d.g.resize(cfg.n);
  d.y.resize(cfg.n);
  Xoshiro256pp rng(cfg.seed);
  draw_into(cfg, rng, d.f, d.g, d.y);
  return d;
}

VarianceCheck verify_estimator_variance(const GaussianWorldConfig& cfg,
                                        WorldEstimator estimator,
                                        std::size_t replicates,
                                        unsigned threads) {
  validate(cfg);
  if (replicates < 1000)
    throw TooFewReplicates("variance verification needs >= 1000 replicates");

  const auto per_replicate = [&](std::size_t r) {
    thread_local PairedSample buf(std::vector<double>(1, 0.0),
                                  std::vector<double>(1, 0.0));
    thread_local std::vector<double> f;
    if (buf.y.size() != cfg.n) {
      buf.y.assign(cfg.n, 0.0);
      buf.g.assign(cfg.n, 0.0);
      f.assign(cfg.n, 0.0);
    }
    auto rng = Xoshiro256pp::stream(cfg.seed, {kVarianceTag, r});
    draw_into(cfg, rng, f, buf.g, buf.y);
    return evaluate(estimator, cfg, buf) - cfg.mu;
  };
  const PowerSums s = run_replicates(replicates, threads, per_replicate);

  const double nn = static_cast<double>(s.count);
  const double dbar = s.s1 / nn;
  const double m2 = (s.s2 - s.s1 * s.s1 / nn) / nn;
  const double m4 =
      (s.s4 - 4.0 * dbar * s.s3 + 6.0 * dbar * dbar * s.s2 -
       3.0 * nn * dbar * dbar * dbar * dbar) /
      nn;

  VarianceCheck out;
  out.replicates = s.count;
  out.empirical_mean = cfg.mu + dbar;
  out.empirical_var = m2 * nn / (nn - 1.0);
  out.empirical_se =
      std::sqrt(std::max(0.0, m4 - (nn - 3.0) / (nn - 1.0) * m2 * m2) / nn);
  const TheoryParams tp = theory_of(cfg);
  out.theory_var = estimator == WorldEstimator::sample_mean
                       ? variance_simple(tp, cfg.n)
                       : variance_control(tp, cfg.n);
  out.rel_err = out.theory_var > 0.0
                    ? std::abs(out.empirical_var - out.theory_var) / out.theory_var
                    : std::abs(out.empirical_var - out.theory_var);
  return out;
}

BiasCurve bias_curve(const GaussianWorldConfig& cfg,
                     const std::vector<std::size_t>& n_list,
                     std::size_t replicates, WorldEstimator estimator,
                     unsigned threads) {
  validate(cfg);
  if (n_list.size() < 3)
    throw TooFewPoints("bias curve needs >= 3 grid points");
  for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
    if (n_list[i] >= n_list[i + 1])
      throw TooFewPoints("n_list must be strictly increasing");

  BiasCurve curve;
  curve.points.reserve(n_list.size());
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    GaussianWorldConfig world = cfg;
    world.n = n_list[ni];
    const auto per_replicate = [&](std::size_t r) {
      thread_local PairedSample buf(std::vector<double>(1, 0.0),
                                    std::vector<double>(1, 0.0));
      thread_local std::vector<double> f;
      if (buf.y.size() != world.n) {
        buf.y.assign(world.n, 0.0);
        buf.g.assign(world.n, 0.0);
        f.assign(world.n, 0.0);
      }
      auto rng = Xoshiro256pp::stream(cfg.seed, {kBiasTag, ni, r});
      draw_into(world, rng, f, buf.g, buf.y);
      return evaluate(estimator, world, buf) - cfg.mu;
    };
    const PowerSums s = run_replicates(replicates, threads, per_replicate);
    const double nn = static_cast<double>(s.count);
    const double bias = s.s1 / nn;
    const double var = (s.s2 - s.s1 * s.s1 / nn) / (nn - 1.0);
    curve.points.push_back(
        BiasPoint{n_list[ni], bias, std::sqrt(var / nn)});
  }

  // least squares of log|bias| against log n
  const double m = static_cast<double>(curve.points.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& p : curve.points) {
    const double x = std::log(static_cast<double>(p.n));
    const double y = std::log(std::abs(p.bias));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  curve.loglog_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return curve;
}

std::vector<double> sample_two_factor(const linalg::TwoFactorConfig& cfg,
                                      std::uint64_t seed) {
  const std::size_t m = cfg.V.rows();
  if (cfg.U && cfg.U->rows() != m)
    throw MalformedAssignment("item and worker assignments disagree on the "
                              "number of responses");
  const std::size_t n_items = cfg.U ? cfg.U->cols() : m;
  const double sx = std::sqrt(cfg.sigma_X2);
  const double sw = std::sqrt(cfg.sigma_W2);
  const double sr = std::sqrt(cfg.sigma_R2);

  Xoshiro256pp rng(seed);
  std::vector<double> x(n_items), w(cfg.V.cols());
  for (auto& v : x) v = cfg.mu_X + sx * rng.normal();
  for (auto& v : w) v = sw * rng.normal();
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t u = cfg.U ? cfg.U->col_of(i) : i;
    y[i] = x[u] + w[cfg.V.col_of(i)] + sr * rng.normal();
  }
  return y;
}

}  // namespace cveval::sim
