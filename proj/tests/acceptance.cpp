// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cveval/bootstrap.hpp"
#include "cveval/commands.hpp"
#include "cveval/errors.hpp"
#include "cveval/estimator.hpp"
#include "cveval/gaussian_linalg.hpp"
#include "cveval/rng.hpp"
#include "cveval/synthetic.hpp"
#include "cveval/text_metrics.hpp"

using namespace cveval;

namespace {

const std::string kFixtures = CVEVAL_FIXTURE_DIR;

int g_failures = 0;

void run_criterion(int id, const std::string& name,
                   const std::function<std::string()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  try {
    detail = body();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  if (detail.rfind("FAIL", 0) == 0) pass = false;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("%s  criterion %d: %s (%.1f s)%s%s\n", pass ? "PASS" : "FAIL",
              id, name.c_str(), secs, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmtd(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// --------------------------------------------------------------------------
// 1. data-efficiency fixed points

std::string criterion1() {
  for (double gamma : {0.0, 0.5, 2.0})
    if (data_efficiency(0.0, gamma) != 1.0)
      return "FAIL: DE(0, " + fmtd(gamma) + ") != 1";
  if (std::abs(data_efficiency(std::sqrt(2.0) / 2.0, 0.0) - 2.0) > 1e-12)
    return "FAIL: DE(sqrt2/2, 0) != 2";
  for (double gamma : {0.25, 1.0, 4.0}) {
    const double cap = (1.0 + gamma) / gamma;
    if (std::abs(data_efficiency(1.0, gamma) - cap) > 1e-12)
      return "FAIL: cap not attained at rho = 1, gamma = " + fmtd(gamma);
  }
  return "all fixed points exact";
}

// --------------------------------------------------------------------------
// 2. Theorem-1 Monte Carlo variance

std::string criterion2() {
  struct Case {
    double sf2, sa2, rho;
  };
  const Case cases[] = {{1.0, 1.0, 0.0}, {1.0, 1.0, 0.5}, {1.0, 0.25, 0.9}};
  const std::size_t reps = 200000;
  double worst = 0.0;
  std::uint64_t seed = 20001;
  for (const auto& c : cases) {
    for (std::size_t n : {std::size_t{10}, std::size_t{100}}) {
      sim::GaussianWorldConfig cfg;
      cfg.mu = 0.3;
      cfg.sigma_f2 = c.sf2;
      cfg.sigma_a2 = c.sa2;
      cfg.alpha = c.rho * std::sqrt(c.sf2);
      cfg.n = n;
      cfg.seed = seed++;
      const auto oracle = sim::verify_estimator_variance(
          cfg, sim::WorldEstimator::control_variates_oracle, reps);
      const auto simple = sim::verify_estimator_variance(
          cfg, sim::WorldEstimator::sample_mean, reps);
      worst = std::max({worst, oracle.rel_err, simple.rel_err});
      if (oracle.rel_err > 0.03)
        return "FAIL: oracle rel_err " + fmtd(oracle.rel_err) + " at rho=" +
               fmtd(c.rho) + ", n=" + std::to_string(n);
      if (simple.rel_err > 0.03)
        return "FAIL: simple rel_err " + fmtd(simple.rel_err) + " at rho=" +
               fmtd(c.rho) + ", n=" + std::to_string(n);
    }
  }
  return "worst relative error " + fmtd(worst) + " (tolerance 0.03)";
}

// --------------------------------------------------------------------------
// 3. plug-in bias decays as 1/n; oracle stays unbiased

std::string criterion3() {
  sim::GaussianWorldConfig cfg;
  cfg.mu = 0.3;
  cfg.sigma_f2 = 1.0;
  cfg.sigma_a2 = 0.25;
  cfg.alpha = 0.8;
  cfg.seed = 30001;
  cfg.g_dist = sim::GDistribution::centered_exponential;
  const std::vector<std::size_t> grid{5, 10, 20, 40, 80};
  const std::size_t reps = 1000000;

  const auto plugin =
      sim::bias_curve(cfg, grid, reps, sim::WorldEstimator::control_variates);
  if (plugin.loglog_slope < -1.25 || plugin.loglog_slope > -0.75)
    return "FAIL: slope " + fmtd(plugin.loglog_slope) + " outside [-1.25, -0.75]";

  cfg.seed = 30002;
  const auto oracle = sim::bias_curve(
      cfg, grid, reps, sim::WorldEstimator::control_variates_oracle);
  for (const auto& p : oracle.points)
    if (std::abs(p.bias) > 4.0 * p.se)
      return "FAIL: oracle bias " + fmtd(p.bias) + " > 4 SE at n = " +
             std::to_string(p.n);
  return "slope " + fmtd(plugin.loglog_slope) + "; oracle bias within 4 SE";
}

// --------------------------------------------------------------------------
// 4. minimax spot check on the Gaussian construction

std::string criterion4() {
  const double sf2 = 1.0, sa2 = 0.25, alpha = 0.8, mu = 0.3;
  const std::size_t n = 100, reps = 100000;
  const double beta = std::sqrt(sf2 - alpha * alpha);

  // power sums (about mu) for: oracle, sample mean, plug-in, OLS slope,
  // difference estimator (fixed alpha = 1)
  constexpr int kEst = 5;
  double s1[kEst] = {0}, s2[kEst] = {0};
  std::vector<double> y(n), g(n);
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = Xoshiro256pp::stream(40001, {r});
    double sy = 0, sg = 0, syg = 0, sgg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e1 = rng.normal();
      const double f = mu + alpha * e1 + beta * rng.normal();
      y[i] = f + std::sqrt(sa2) * rng.normal();
      g[i] = e1;
      sy += y[i];
      sg += g[i];
      syg += y[i] * g[i];
      sgg += g[i] * g[i];
    }
    const double nn = static_cast<double>(n);
    const double ybar = sy / nn, gbar = sg / nn;
    const double cov = syg / nn - ybar * gbar;
    const double varg = sgg / nn - gbar * gbar;
    const double est[kEst] = {
        ybar - alpha * gbar,          // oracle
        ybar,                         // sample mean
        ybar - cov * gbar,            // plug-in (1/n covariance)
        ybar - (cov / varg) * gbar,   // OLS regression slope
        ybar - 1.0 * gbar,            // difference estimator
    };
    for (int k = 0; k < kEst; ++k) {
      const double d = est[k] - mu;
      s1[k] += d;
      s2[k] += d * d;
    }
  }
  double var[kEst];
  const double nn = static_cast<double>(reps);
  for (int k = 0; k < kEst; ++k)
    var[k] = (s2[k] - s1[k] * s1[k] / nn) / (nn - 1.0);
  const char* names[kEst] = {"oracle", "sample_mean", "plugin", "ols",
                             "difference"};
  std::string detail = "variance ratios to oracle:";
  for (int k = 1; k < kEst; ++k) {
    const double ratio = var[k] / var[0];
    detail += std::string(" ") + names[k] + "=" + fmtd(ratio);
    if (ratio < 0.99)
      return "FAIL: " + std::string(names[k]) + " beats the oracle by " +
             fmtd((1.0 - ratio) * 100.0) + "%";
  }
  return detail;
}

// --------------------------------------------------------------------------
// 5. bootstrap coverage and empirical data efficiency

std::string criterion5() {
  // coverage of the 80% percentile CI for the sample mean
  const std::size_t trials = 2000, n = 100;
  const double mu = 0.3;
  std::size_t covered = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    sim::GaussianWorldConfig w;
    w.mu = mu;
    w.sigma_f2 = 1.0;
    w.sigma_a2 = 0.0;
    w.n = n;
    w.seed = hash_stream(50001, {t});
    const auto d = sim::sample_world(w);
    const PairedSample s(d.y, d.g);
    const auto ci = bootstrap_ci(BootstrapEstimator::sample_mean, s,
                                 BootstrapConfig{0.80, 1000,
                                                 hash_stream(50002, {t})});
    if (ci.lo <= mu && mu <= ci.hi) ++covered;
  }
  const double coverage = static_cast<double>(covered) / trials;
  if (coverage < 0.77 || coverage > 0.83)
    return "FAIL: coverage " + fmtd(coverage) + " outside 0.80 +- 0.03";

  // empirical DE vs the formula
  struct Case {
    double rho, gamma;
  };
  std::string detail = "coverage " + fmtd(coverage) + "; DE rel errs:";
  std::uint64_t seed = 50100;
  for (const Case c : {Case{0.0, 1.0}, Case{0.5, 1.0}, Case{0.9, 0.1}}) {
    sim::GaussianWorldConfig w;
    w.mu = 0.5;
    w.sigma_f2 = 1.0;
    w.sigma_a2 = c.gamma;
    w.alpha = c.rho;
    w.n = 1000;
    w.seed = seed++;
    const auto d = sim::sample_world(w);
    const PairedSample data(d.y, d.g);
    const auto traj = trajectory(data, {200, 400, 800}, 20,
                                 BootstrapConfig{0.80, 500, seed++});
    const double de = empirical_data_efficiency(traj);
    const double theory = data_efficiency(c.rho, c.gamma);
    const double rel = std::abs(de - theory) / theory;
    detail += " (" + fmtd(c.rho) + "," + fmtd(c.gamma) + ")=" + fmtd(rel);
    if (rel > 0.20)
      return "FAIL: empirical DE " + fmtd(de) + " vs " + fmtd(theory) +
             " (rel " + fmtd(rel) + ") at rho=" + fmtd(c.rho) +
             ", gamma=" + fmtd(c.gamma);
  }
  return detail;
}

// --------------------------------------------------------------------------
// 6. linear-algebra lemmas

std::string criterion6() {
  auto rng = Xoshiro256pp(60001);
  const auto random_spd = [&](Eigen::Index k) {
    Eigen::MatrixXd m(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) m(i, j) = rng.normal();
    return Eigen::MatrixXd(m * m.transpose() +
                           Eigen::MatrixXd::Identity(k, k));
  };

  // Woodbury vs dense inverse, 100 random instances
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index nd = 4 + static_cast<Eigen::Index>(rng.below(5));
    const Eigen::Index kd = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Eigen::MatrixXd a = random_spd(nd);
    const Eigen::MatrixXd c = random_spd(kd);
    Eigen::MatrixXd u(nd, kd), v(kd, nd);
    for (Eigen::Index i = 0; i < nd; ++i)
      for (Eigen::Index j = 0; j < kd; ++j) {
        u(i, j) = 0.5 * rng.normal();
        v(j, i) = 0.5 * rng.normal();
      }
    const Eigen::MatrixXd got =
        linalg::woodbury_inverse(a.inverse(), u, c.inverse(), v);
    const Eigen::MatrixXd expect = (a + u * c * v).inverse();
    if ((got - expect).cwiseAbs().maxCoeff() > 1e-10)
      return "FAIL: woodbury mismatch at instance " + std::to_string(rep);
  }

  // (I + k U U^T)^{-1} vs dense inverse, plus the all-counts-1 closed form
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 1 + rng.below(30);
    std::vector<std::size_t> assign(m);
    const std::size_t cols = 1 + rng.below(8);
    for (auto& a : assign) a = rng.below(cols);
    const linalg::IndicatorMatrix U(cols, assign);
    const double k = 0.1 + 5.0 * rng.uniform01();
    const Eigen::MatrixXd inv = linalg::inv_identity_plus_scaled_gram(k, U);
    const Eigen::MatrixXd dense =
        (Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                   static_cast<Eigen::Index>(m)) +
         k * linalg::gram(U))
            .inverse();
    if ((inv - dense).cwiseAbs().maxCoeff() > 1e-10)
      return "FAIL: scaled-gram inverse mismatch at instance " +
             std::to_string(rep);
  }
  {
    // permutation indicator: the special case from the lemma, to 1e-12
    const linalg::IndicatorMatrix perm(6, {3, 1, 0, 2, 5, 4});
    for (double k : {0.25, 1.0, 7.0}) {
      const Eigen::MatrixXd inv = linalg::inv_identity_plus_scaled_gram(k, perm);
      const Eigen::MatrixXd expect =
          Eigen::MatrixXd::Identity(6, 6) - (k / (k + 1.0)) * linalg::gram(perm);
      if ((inv - expect).cwiseAbs().maxCoeff() > 1e-12)
        return "FAIL: all-counts-1 closed form at k = " + fmtd(k);
    }
  }

  // precision * covariance = I on 100 random two-factor configs
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 1 + rng.below(40);
    std::vector<std::size_t> assign(m);
    const std::size_t workers = 1 + rng.below(10);
    for (auto& a : assign) a = rng.below(workers);
    linalg::TwoFactorConfig cfg{rng.normal(), 0.05 + rng.uniform01(),
                                2.0 * rng.uniform01(), 0.05 + rng.uniform01(),
                                linalg::IndicatorMatrix(workers, assign),
                                {}};
    const Eigen::MatrixXd prod =
        linalg::two_factor_precision(cfg) * linalg::two_factor_covariance(cfg);
    if ((prod - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                          static_cast<Eigen::Index>(m)))
            .cwiseAbs()
            .maxCoeff() > 1e-10)
      return "FAIL: precision * covariance != I at instance " +
             std::to_string(rep);
  }

  // sufficient statistics hand example
  Eigen::VectorXd yv(3);
  yv << 1, 2, 3;
  const auto s = linalg::sufficient_stats(yv, linalg::IndicatorMatrix(2, {0, 0, 1}));
  if (s.t1 != 14.0 || s.t2 != 18.0 || s.t3 != 6.0 || s.t4 != 9.0)
    return "FAIL: sufficient stats (" + fmtd(s.t1) + "," + fmtd(s.t2) + "," +
           fmtd(s.t3) + "," + fmtd(s.t4) + ") != (14,18,6,9)";
  return "woodbury, scaled-gram, two-factor and T1..T4 all verified";
}

// --------------------------------------------------------------------------
// 7. text-metric goldens

std::string criterion7() {
  const auto cand = text::tokenize("the cat sat");
  const auto ref = text::tokenize("the cat was sad");

  const auto ident = text::tokenize("a tiny example");
  if (text::rouge_n(ident, ident, 1) != 1.0 ||
      text::rouge_n(ident, ident, 2) != 1.0 ||
      text::rouge_l(ident, ident) != 1.0 || text::bleu(ident, {ident}) != 1.0)
    return "FAIL: identity does not score 1";

  if (std::abs(text::rouge_n(cand, ref, 1) - 4.0 / 7.0) > 1e-12)
    return "FAIL: rouge-1 fixture != 4/7";
  if (std::abs(text::rouge_l(cand, ref) - 4.0 / 7.0) > 1e-12)
    return "FAIL: rouge-L fixture != 4/7";

  // brute-force LCS oracle on 1000 random pairs (full-table DP)
  auto rng = Xoshiro256pp(70001);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int rep = 0; rep < 1000; ++rep) {
    text::TokenSequence a(rng.below(13)), b(rng.below(13));
    for (auto& t : a) t = vocab[static_cast<std::size_t>(rng.below(4))];
    for (auto& t : b) t = vocab[static_cast<std::size_t>(rng.below(4))];
    const std::size_t m = a.size(), nn = b.size();
    std::vector<std::vector<std::size_t>> d(
        m + 1, std::vector<std::size_t>(nn + 1, 0));
    for (std::size_t i = 1; i <= m; ++i)
      for (std::size_t j = 1; j <= nn; ++j)
        d[i][j] = a[i - 1] == b[j - 1]
                      ? d[i - 1][j - 1] + 1
                      : std::max(d[i - 1][j], d[i][j - 1]);
    const std::size_t l = d[m][nn];
    double expect = 0.0;
    if (m > 0 && nn > 0 && l > 0) {
      const double p = static_cast<double>(l) / m;
      const double r = static_cast<double>(l) / nn;
      expect = 2.0 * p * r / (p + r);
    }
    if (text::rouge_l(a, b) != expect)
      return "FAIL: rouge-L differs from the LCS oracle at pair " +
             std::to_string(rep);
  }

  const double b13 =
      text::bleu(text::tokenize("the the the"), {text::tokenize("the cat")}, 1);
  if (std::abs(b13 - 1.0 / 3.0) > 1e-12)
    return "FAIL: clipped BLEU fixture != 1/3";
  return "identity, 4/7 fixtures, 1000-pair LCS oracle and BLEU 1/3 exact";
}

// --------------------------------------------------------------------------
// 8. end-to-end plant fixture

std::string criterion8() {
  io::RunConfig cfg;
  cfg.input = kFixtures + "/plant200.jsonl";
  cfg.metric = "plantsim";
  cfg.prompt = "Overall";
  cfg.seed = 2026;
  cfg.level = 0.80;
  cfg.bootstrap_replicates = 2000;

  const auto res = io::run_estimate(cfg);
  const double plant_mu = 0.6, plant_rho = 0.7, plant_gamma = 0.5;
  const double plant_de = data_efficiency(plant_rho, plant_gamma);

  if (!(res.ci_cv.lo <= plant_mu && plant_mu <= res.ci_cv.hi))
    return "FAIL: CI [" + fmtd(res.ci_cv.lo) + ", " + fmtd(res.ci_cv.hi) +
           "] misses mu = 0.6";
  if (!res.rho_hat || std::abs(*res.rho_hat - plant_rho) > 0.1)
    return "FAIL: rho_hat " + (res.rho_hat ? fmtd(*res.rho_hat) : "absent") +
           " not within 0.1 of 0.7";
  if (!res.de_theory || std::abs(*res.de_theory - plant_de) > 0.2)
    return "FAIL: DE " + (res.de_theory ? fmtd(*res.de_theory) : "absent") +
           " not within 0.2 of " + fmtd(plant_de);

  io::RunConfig tcfg = cfg;
  tcfg.n_grid = {50, 100, 150};
  tcfg.reps_per_n = 5;
  tcfg.bootstrap_replicates = 400;
  const auto t1 = io::run_trajectory(tcfg);
  const auto t2 = io::run_trajectory(tcfg);
  if (t1.csv != t2.csv) return "FAIL: trajectory CSV differs across runs";
  if (t1.csv.empty() || t1.points.size() != 3)
    return "FAIL: unexpected trajectory shape";

  return "mu in CI [" + fmtd(res.ci_cv.lo) + ", " + fmtd(res.ci_cv.hi) +
         "], rho_hat " + fmtd(*res.rho_hat) + ", DE " + fmtd(*res.de_theory) +
         ", trajectory byte-identical";
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run_criterion(1, "data-efficiency fixed points", criterion1);
  run_criterion(2, "Theorem-1 Monte Carlo variance (3% rel)", criterion2);
  run_criterion(3, "plug-in bias rate / oracle unbiasedness", criterion3);
  run_criterion(4, "minimax spot check (1% slack)", criterion4);
  run_criterion(5, "bootstrap coverage and empirical DE", criterion5);
  run_criterion(6, "linear-algebra lemmas (1e-10)", criterion6);
  run_criterion(7, "text-metric goldens", criterion7);
  run_criterion(8, "end-to-end plant fixture", criterion8);
  if (g_failures == 0) {
    std::printf("all 8 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
