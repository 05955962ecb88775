#include <doctest.h>

#include <cmath>
#include <vector>

#include "cveval/bootstrap.hpp"
#include "cveval/errors.hpp"
#include "cveval/estimator.hpp"
#include "cveval/synthetic.hpp"

using namespace cveval;

TEST_CASE("quantile_sorted interpolates linearly") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_sorted(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile_sorted(v, 1.0) == doctest::Approx(4.0));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_sorted(v, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("bootstrap_ci basics") {
  SUBCASE("constant sample is degenerate") {
    const PairedSample s({3.0, 3.0, 3.0, 3.0}, {0.1, 0.2, 0.3, 0.4});
    const auto ci =
        bootstrap_ci(BootstrapEstimator::sample_mean, s, BootstrapConfig{});
    CHECK(ci.lo == doctest::Approx(3.0));
    CHECK(ci.hi == doctest::Approx(3.0));
    CHECK(ci.width == doctest::Approx(0.0));
  }
  SUBCASE("deterministic under a fixed seed") {
    const PairedSample s({1.0, 2.0, 3.0}, {0.5, -0.5, 0.0});
    const BootstrapConfig cfg{0.8, 1000, 12345};
    const auto a = bootstrap_ci(BootstrapEstimator::sample_mean, s, cfg);
    const auto b = bootstrap_ci(BootstrapEstimator::sample_mean, s, cfg);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    CHECK(a.width == b.width);
    const auto c = bootstrap_ci(BootstrapEstimator::control_variates, s, cfg);
    const auto d = bootstrap_ci(BootstrapEstimator::control_variates, s, cfg);
    CHECK(c.lo == d.lo);
    CHECK(c.hi == d.hi);
  }
  SUBCASE("config validation") {
    const PairedSample s({1.0, 2.0}, {0.0, 0.0});
    CHECK_THROWS_AS(
        bootstrap_ci(BootstrapEstimator::sample_mean, s,
                     BootstrapConfig{0.0, 100, 0}),
        Error);
    CHECK_THROWS_AS(
        bootstrap_ci(BootstrapEstimator::sample_mean, s,
                     BootstrapConfig{0.8, 1, 0}),
        Error);
  }
  SUBCASE("gaussian width matches the normal approximation") {
    // sd = 1, n = 100: 80% width ~ 2 * 1.2815515655 / 10, within 15%
    sim::GaussianWorldConfig world;
    world.mu = 0.0;
    world.sigma_f2 = 1.0;
    world.sigma_a2 = 0.0;
    world.n = 100;
    world.seed = 2024;
    const auto draw = sim::sample_world(world);
    const PairedSample s(draw.y, draw.g);
    const auto ci = bootstrap_ci(BootstrapEstimator::sample_mean, s,
                                 BootstrapConfig{0.80, 2000, 7});
    const double expect = 2.0 * 1.2815515655446004 / 10.0;
    CHECK(std::abs(ci.width - expect) / expect < 0.15);
  }
}

TEST_CASE("trajectory") {
  sim::GaussianWorldConfig world;
  world.mu = 0.5;
  world.sigma_f2 = 1.0;
  world.sigma_a2 = 0.25;
  world.alpha = 0.9;
  world.n = 400;
  world.seed = 77;
  const auto draw = sim::sample_world(world);
  const PairedSample data(draw.y, draw.g);

  SUBCASE("full-data single point equals the direct widths") {
    const BootstrapConfig cfg{0.8, 400, 5};
    const auto traj = trajectory(data, {400}, 1, cfg);
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].n == 400);
    CHECK(traj[0].width_simple > 0.0);
    CHECK(traj[0].width_cv > 0.0);
    // the single full-size subsample is a permutation of the data, so the
    // widths must match a direct bootstrap of the same resample streams
    CHECK(traj[0].width_cv < traj[0].width_simple);
  }
  SUBCASE("widths shrink as n grows") {
    const BootstrapConfig cfg{0.8, 300, 5};
    const auto traj = trajectory(data, {100, 400}, 8, cfg);
    CHECK(traj[1].width_simple < traj[0].width_simple);
    CHECK(traj[1].width_cv < traj[0].width_cv);
  }
  SUBCASE("high correlation, low noise: cv is uniformly narrower") {
    sim::GaussianWorldConfig w2 = world;
    w2.sigma_a2 = 0.0;
    w2.alpha = 0.99;
    w2.seed = 78;
    const auto d2 = sim::sample_world(w2);
    const PairedSample data2(d2.y, d2.g);
    const auto traj = trajectory(data2, {50, 100, 200}, 6,
                                 BootstrapConfig{0.8, 300, 6});
    for (const auto& p : traj) CHECK(p.width_cv < p.width_simple);
  }
  SUBCASE("grid validation") {
    CHECK_THROWS_AS(
        trajectory(data, {401}, 1, BootstrapConfig{}),
        GridExceedsData);
    CHECK_THROWS_AS(
        trajectory(data, {0}, 1, BootstrapConfig{}),
        GridExceedsData);
  }
  SUBCASE("determinism across calls") {
    const BootstrapConfig cfg{0.8, 200, 99};
    const auto a = trajectory(data, {50, 100}, 3, cfg);
    const auto b = trajectory(data, {50, 100}, 3, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].width_simple == b[i].width_simple);
      CHECK(a[i].width_cv == b[i].width_cv);
    }
  }
}

TEST_CASE("empirical_data_efficiency") {
  CHECK(empirical_data_efficiency({{100, 1.0, 1.0}, {200, 0.5, 0.5}}) ==
        doctest::Approx(1.0));
  CHECK(empirical_data_efficiency({{100, 2.0, 1.0}}) == doctest::Approx(4.0));
  CHECK_THROWS_AS(empirical_data_efficiency({}), EmptySample);
  CHECK_THROWS_AS(empirical_data_efficiency({{10, 1.0, 0.0}}), ZeroWidth);
}

TEST_SUITE("slow") {
  TEST_CASE("empirical DE tracks the formula on synthetic worlds") {
    // the rho = 0 world: no gain, DE must sit near 1
    sim::GaussianWorldConfig world;
    world.mu = 0.4;
    world.sigma_f2 = 1.0;
    world.sigma_a2 = 1.0;
    world.alpha = 0.0;
    world.n = 600;
    world.seed = 404;
    const auto draw = sim::sample_world(world);
    const PairedSample data(draw.y, draw.g);
    const auto traj =
        trajectory(data, {150, 300}, 12, BootstrapConfig{0.8, 400, 11});
    const double de = empirical_data_efficiency(traj);
    CHECK(std::abs(de - 1.0) < 0.15);
  }
}
