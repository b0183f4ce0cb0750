// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include <cstdlib>
#include <vector>

#include <cmath>

#include "bicount/bootstrap.hpp"
#include "bicount/sampling.hpp"
#include "bicount/study.hpp"
#include "support/oracles.hpp"

using namespace bicount;

TEST_CASE("type-1 quantile is the ceil(qM) order statistic", "[bootstrap]") {
  REQUIRE(quantile_type1({1, 2, 3, 4}, 0.5) == 2.0);
  REQUIRE(quantile_type1({5}, 0.0) == 5.0);
  REQUIRE(quantile_type1({5}, 0.73) == 5.0);
  std::vector<double> grid;
  for (int k = 1; k <= 100; ++k) grid.push_back(0.1 * k);
  REQUIRE(quantile_type1(grid, 0.95) == Approx(9.5));
  REQUIRE_THROWS_AS(quantile_type1({}, 0.5), InvalidParams);
  REQUIRE_THROWS_AS(quantile_type1({1.0}, 1.5), InvalidParams);
}

TEST_CASE("single-replication bootstrap p-values hit the formula bounds",
          "[bootstrap]") {
  const BivariateSample s = sample(
      DistributionSpec(BPoiParams(0.5, 1.0, 1.0)), 60, 4);
  BootstrapConfig cfg;
  cfg.replications = 1;
  cfg.seed = 9;
  const TestReport r = bootstrap_p_value(s, "t1", "f1", cfg);
  REQUIRE((r.p_value == 0.5 || r.p_value == 1.0));
}

TEST_CASE("bootstrap report carries the frozen schema fields", "[bootstrap]") {
  const BivariateSample s = sample(
      DistributionSpec(BPoiParams(0.5, 1.0, 1.0)), 80, 4);
  BootstrapConfig cfg;
  cfg.replications = 199;
  cfg.seed = 11;
  const TestReport r = bootstrap_p_value(s, "t1", "f05", cfg);
  REQUIRE(r.statistic_id == "t1");
  REQUIRE(r.weight_id == "f05");
  REQUIRE(r.method == "bootstrap");
  REQUIRE(r.replications == 199);
  REQUIRE(r.seed == 11);
  REQUIRE(r.p_value > 0.0);
  REQUIRE(r.p_value <= 1.0);
}

TEST_CASE("warp-speed runs are identical for any worker count", "[bootstrap]") {
  const DistributionSpec dist = BPoiParams(1.0, 1.0, 1.0);
  BootstrapConfig cfg;
  cfg.alpha = 0.05;
  cfg.seed = 20260808;
  setenv("STEIN_BICOUNT_THREADS", "1", 1);
  const WarpSpeedRun serial =
      warp_speed_study(dist, "BPoi-5", 50, "t1", "f1", 300, cfg);
  setenv("STEIN_BICOUNT_THREADS", "4", 1);
  const WarpSpeedRun parallel =
      warp_speed_study(dist, "BPoi-5", 50, "t1", "f1", 300, cfg);
  unsetenv("STEIN_BICOUNT_THREADS");
  REQUIRE(serial.stats == parallel.stats);
  REQUIRE(serial.boot_stats == parallel.boot_stats);
  REQUIRE(serial.rejection_rate == parallel.rejection_rate);
  REQUIRE(serial.critical_value == parallel.critical_value);
}

TEST_CASE("bootstrap p-values are uniform-ish under a true null", "[bootstrap]") {
  // 200 seeded repeats of the full procedure on null data; the empirical
  // p distribution passes Kolmogorov-Smirnov against U(0,1) at the 1%
  // level (critical value 1.628 / sqrt(200)).
  const DistributionSpec null_dist = BPoiParams(0.5, 1.0, 1.0);
  std::vector<double> p_values;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const BivariateSample s = sample(null_dist, 100, 5000 + rep);
    BootstrapConfig cfg;
    cfg.replications = 99;
    cfg.seed = 9000 + rep;
    p_values.push_back(bootstrap_p_value(s, "t1", "f1", cfg).p_value);
  }
  const double d = oracles::ks_distance_uniform(p_values);
  REQUIRE(d < 1.628 / std::sqrt(200.0));

  // stochastically not smaller than uniform: the lower tail is not inflated
  double at_5 = 0.0;
  double at_10 = 0.0;
  for (double p : p_values) {
    if (p <= 0.05) at_5 += 1.0;
    if (p <= 0.10) at_10 += 1.0;
  }
  REQUIRE(at_5 / 200.0 <= 0.05 + 0.045);
  REQUIRE(at_10 / 200.0 <= 0.10 + 0.06);
}

TEST_CASE("warp-speed size is near the nominal level", "[bootstrap]") {
  BootstrapConfig cfg;
  cfg.alpha = 0.05;
  cfg.seed = 77;
  const WarpSpeedRun run = warp_speed_study(
      DistributionSpec(BPoiParams(1.0, 1.0, 1.0)), "BPoi-5", 100, "t1", "f1",
      1000, cfg);
  REQUIRE(run.rejection_rate == Approx(0.05).margin(0.03));
}

TEST_CASE("warp-speed detects underdispersion at full strength", "[bootstrap]") {
  BootstrapConfig cfg;
  cfg.alpha = 0.05;
  cfg.seed = 85;
  const WarpSpeedRun run = warp_speed_study(
      find_scenario("BVB-1").dist, "BVB-1", 200, "t1", "f1", 2000, cfg);
  REQUIRE(run.rejection_rate >= 0.99);
}

TEST_CASE("warp-speed power grows with the sample size", "[bootstrap]") {
  BootstrapConfig cfg;
  cfg.alpha = 0.05;
  cfg.seed = 78;
  const DistributionSpec alt = BHermParams(0.75, 0.25, 0.5, 0.15, 0.1);
  const double at_50 =
      warp_speed_study(alt, "BHerm-1", 50, "t1", "f1", 600, cfg).rejection_rate;
  const double at_200 =
      warp_speed_study(alt, "BHerm-1", 200, "t1", "f1", 600, cfg).rejection_rate;
  REQUIRE(at_200 >= at_50 - 0.03);
  REQUIRE(at_200 > 0.9);
}

TEST_CASE("full-bootstrap cross-check brackets the warp-speed size",
          "[bootstrap]") {
  BootstrapConfig warp_cfg;
  warp_cfg.alpha = 0.05;
  warp_cfg.seed = 81;
  const DistributionSpec dist = BPoiParams(0.1, 0.2, 0.3);
  const double warp =
      warp_speed_study(dist, "BPoi-3", 100, "t1", "f1", 800, warp_cfg)
          .rejection_rate;
  BootstrapConfig full_cfg;
  full_cfg.alpha = 0.05;
  full_cfg.seed = 82;
  full_cfg.replications = 199;
  const double full =
      full_bootstrap_rejection_rate(dist, 100, "t1", "f1", 400, full_cfg);
  REQUIRE(warp == Approx(0.05).margin(0.035));
  REQUIRE(full == Approx(0.05).margin(0.035));
}

TEST_CASE("warp-speed rejects everything as alpha approaches one",
          "[bootstrap]") {
  BootstrapConfig cfg;
  cfg.alpha = 0.999;
  cfg.seed = 83;
  const WarpSpeedRun run = warp_speed_study(
      DistributionSpec(BPoiParams(1.0, 1.0, 1.0)), "BPoi-5", 50, "t1", "f1",
      200, cfg);
  REQUIRE(run.rejection_rate > 0.95);
}

TEST_CASE("chi-squared tstar holds its level over seeded null samples",
          "[bootstrap]") {
  // BPoi-5 samples at n = 500: p >= 0.01 in at least 95 of 100 seeds
  const DistributionSpec dist = BPoiParams(1.0, 1.0, 1.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BivariateSample s = sample(dist, 500, 40000 + seed);
    if (t_star_p_value(t_star(summarize(s)), 500) >= 0.01) ++ok;
  }
  REQUIRE(ok >= 95);
}

TEST_CASE("bootstrap symmetry tests reject asymmetric BPoi data", "[bootstrap]") {
  // BPoi-1 at n = 500 with t2/f05: rejection in at least 80% of 20 seeds
  const DistributionSpec dist = BPoiParams(0.1, 1.25, 0.8);
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BivariateSample s = sample(dist, 500, 41000 + seed);
    BootstrapConfig cfg;
    cfg.replications = 99;
    cfg.seed = 42000 + seed;
    cfg.null_family = NullFamily::bpoi_symmetric;
    if (bootstrap_p_value(s, "t2", "f05", cfg).p_value <= 0.05) ++rejections;
  }
  REQUIRE(rejections >= 16);
}

TEST_CASE("t3 stays nearly blind to symmetric non-BPoi data", "[bootstrap]") {
  // BHerm-3 at n = 500 with t3/f1: rejection rate near 0.11 over 100 seeds
  const DistributionSpec dist = BHermParams(2.0, 1.5, 2.0, 1.5, 1.0);
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BivariateSample s = sample(dist, 500, 43000 + seed);
    BootstrapConfig cfg;
    cfg.replications = 199;
    cfg.seed = 44000 + seed;
    cfg.null_family = NullFamily::bpoi_symmetric;
    if (bootstrap_p_value(s, "t3", "f1", cfg).p_value <= 0.05) ++rejections;
  }
  REQUIRE(rejections >= 4);
  REQUIRE(rejections <= 20);
}

TEST_CASE("warp-speed validates its preconditions", "[bootstrap]") {
  BootstrapConfig cfg;
  REQUIRE_THROWS_AS(
      warp_speed_study(DistributionSpec(BPoiParams(1, 1, 1)), "x", 50, "t1",
                       "f1", 50, cfg),
      InvalidParams);
  REQUIRE_THROWS_AS(observed_statistic("nope", BivariateSample{}, WeightFunction::f1()),
                    ParseError);
}
