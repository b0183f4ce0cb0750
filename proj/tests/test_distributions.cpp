// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "bicount/params.hpp"
#include "bicount/pmf_grid.hpp"
#include "bicount/sampling.hpp"
#include "support/oracles.hpp"

using namespace bicount;

namespace {

/// Chi-squared goodness-of-fit of a sample against an exact grid: cells with
/// expected count >= 5 stand alone, everything else pools.
double sampler_chi2_p_value(const BivariateSample& sample,
                            const TruncatedPmfGrid& grid) {
  const double n = static_cast<double>(sample.size());
  std::map<std::pair<long long, long long>, long long> observed;
  for (const PairCount& p : sample.pairs) ++observed[{p.x1, p.x2}];

  double chi2 = 0.0;
  long long bins = 0;
  double pooled_expected = 0.0;
  long long pooled_observed = 0;
  for (int x = 0; x <= grid.k1(); ++x) {
    for (int y = 0; y <= grid.k2(); ++y) {
      const double expected = n * grid.at(x, y);
      const auto it = observed.find({x, y});
      const double obs = it == observed.end() ? 0.0 : static_cast<double>(it->second);
      if (expected >= 5.0) {
        chi2 += (obs - expected) * (obs - expected) / expected;
        ++bins;
      } else {
        pooled_expected += expected;
        pooled_observed += static_cast<long long>(obs);
      }
    }
  }
  pooled_expected += n * grid.mass_deficit();
  for (const auto& [key, count] : observed) {
    if (key.first > grid.k1() || key.second > grid.k2()) {
      pooled_observed += count;
    }
  }
  if (pooled_expected > 0.0) {
    const double diff = static_cast<double>(pooled_observed) - pooled_expected;
    chi2 += diff * diff / pooled_expected;
    ++bins;
  }
  return oracles::chi_squared_sf(chi2, static_cast<double>(bins - 1));
}

}  // namespace

TEST_CASE("BPoi grid base case and independence product", "[distributions]") {
  const BPoiParams p(0.0, 1.0, 1.0);
  const TruncatedPmfGrid grid = bpoi_pmf_grid(p, 20, 20);
  REQUIRE(grid.at(0, 0) == Approx(std::exp(-2.0)).epsilon(1e-14));
  // independence: p(x, y) factorizes into two Poisson(1) terms
  const auto poi = oracles::poisson_pmf(1.0, 20);
  REQUIRE(grid.at(3, 5) == Approx(poi[3] * poi[5]).epsilon(1e-12));
}

TEST_CASE("BPoi row sums reproduce the Poisson marginal", "[distributions]") {
  const BPoiParams p(0.5, 1.0, 1.0);
  const TruncatedPmfGrid grid = bpoi_pmf_grid(p, 60, 60);
  const auto marginal = oracles::poisson_pmf(1.5, 60);
  for (int x = 0; x <= 60; ++x) {
    double row = 0.0;
    for (int y = 0; y <= 60; ++y) row += grid.at(x, y);
    REQUIRE(row == Approx(marginal[static_cast<std::size_t>(x)]).margin(1e-10));
  }
}

TEST_CASE("BPoi recursion matches the convolution oracle entrywise",
          "[distributions]") {
  const BPoiParams p(0.1, 1.25, 0.8);
  const TruncatedPmfGrid grid = bpoi_pmf_grid(p, 40, 40);
  for (int x = 0; x <= 40; ++x) {
    for (int y = 0; y <= 40; ++y) {
      REQUIRE(grid.at(x, y) ==
              Approx(oracles::bpoi_convolution(0.1, 1.25, 0.8, x, y))
                  .margin(1e-12));
    }
  }
}

TEST_CASE("BVB grid with one trial is the Bernoulli table", "[distributions]") {
  const BvbParams p = BvbParams::from_cells(1, 0.3, 0.25, 0.25, 0.2);
  const TruncatedPmfGrid grid = bvb_pmf_grid(p);
  REQUIRE(grid.at(0, 0) == Approx(0.2).epsilon(1e-14));
  REQUIRE(grid.at(1, 0) == Approx(0.25).epsilon(1e-14));
  REQUIRE(grid.at(0, 1) == Approx(0.25).epsilon(1e-14));
  REQUIRE(grid.at(1, 1) == Approx(0.3).epsilon(1e-14));
}

TEST_CASE("BVB grid mean equals N a1", "[distributions]") {
  const BvbParams p = BvbParams::from_marginals(10, 0.35, 0.325, 0.3);
  const TruncatedPmfGrid grid = bvb_pmf_grid(p);
  const double mean = grid.expectation(
      [](long long x, long long) { return static_cast<double>(x); });
  REQUIRE(mean == Approx(3.5).epsilon(1e-12));
  REQUIRE(grid.mass_deficit() == Approx(0.0).margin(1e-12));
}

TEST_CASE("BVB recursion matches brute-force enumeration of all outcomes",
          "[distributions]") {
  const BvbParams p = BvbParams::from_cells(4, 0.2, 0.3, 0.1, 0.4);
  const TruncatedPmfGrid grid = bvb_pmf_grid(p);
  const auto brute = oracles::bvb_brute_force(4, 0.2, 0.3, 0.1, 0.4);
  for (int x = 0; x <= 4; ++x) {
    for (int y = 0; y <= 4; ++y) {
      const auto it = brute.find({x, y});
      const double expected = it == brute.end() ? 0.0 : it->second;
      REQUIRE(grid.at(x, y) == Approx(expected).margin(1e-13));
    }
  }
}

TEST_CASE("BVB p00 = 0 falls back to the enumeration path", "[distributions]") {
  const BvbParams p = BvbParams::from_cells(6, 0.5, 0.3, 0.2, 0.0);
  const TruncatedPmfGrid grid = bvb_pmf_grid(p);
  REQUIRE(grid.method() == "enumeration");
  REQUIRE(grid.mass_deficit() == Approx(0.0).margin(1e-12));
  for (int x = 0; x <= 6; ++x) {
    for (int y = 0; y <= 6; ++y) {
      REQUIRE(grid.at(x, y) ==
              Approx(oracles::bvb_multinomial(6, 0.5, 0.3, 0.2, 0.0, x, y))
                  .margin(1e-13));
    }
  }
}

TEST_CASE("BNB degenerate pi2 = pi0 = 0 column is the univariate NB pmf",
          "[distributions]") {
  const BnbParams p(3.5, 0.3, 0.0, 0.0);
  const TruncatedPmfGrid grid = bnb_pmf_grid(p, 60, 5);
  const auto nb = oracles::nb_pmf(3.5, 1.0 - 0.3, 60);
  for (int x = 0; x <= 60; ++x) {
    REQUIRE(grid.at(x, 0) == Approx(nb[static_cast<std::size_t>(x)]).margin(1e-12));
    REQUIRE(grid.at(x, 1) == 0.0);
  }
}

TEST_CASE("BNB grid marginal mean matches the closed form", "[distributions]") {
  const BnbParams p(5.0, 0.2, 0.2, 0.05);
  const TruncatedPmfGrid grid = bnb_pmf_grid(p, 120, 120);
  const double mean = grid.expectation(
      [](long long x, long long) { return static_cast<double>(x); });
  REQUIRE(mean == Approx(5.0 * 0.25 / 0.55).epsilon(1e-6));
}

TEST_CASE("BNB recursion matches the pgf series oracle", "[distributions]") {
  const BnbParams p(2.0, 0.1, 0.15, 0.05);
  const TruncatedPmfGrid grid = bnb_pmf_grid(p, 15, 15);
  const auto series = oracles::bnb_pgf_series(2.0, 0.1, 0.15, 0.05, 15, 15);
  for (int x = 0; x <= 15; ++x) {
    for (int y = 0; y <= 15; ++y) {
      REQUIRE(grid.at(x, y) == Approx(series.get(x, y)).margin(1e-9));
    }
  }
}

TEST_CASE("negative pi0 routes to the series path and stays a pmf",
          "[distributions]") {
  const BnbParams p(3.0, 0.25, 0.2, -0.03);
  const TruncatedPmfGrid grid = bnb_pmf_grid(p, 80, 80);
  REQUIRE(grid.method() == "series");
  REQUIRE(grid.mass_deficit() < 1e-8);
  REQUIRE(grid.min_entry() >= -1e-12);
  const auto series = oracles::bnb_pgf_series(3.0, 0.25, 0.2, -0.03, 20, 20);
  for (int x = 0; x <= 20; ++x) {
    for (int y = 0; y <= 20; ++y) {
      REQUIRE(grid.at(x, y) == Approx(series.get(x, y)).margin(1e-10));
    }
  }
  const double mean = grid.expectation(
      [](long long x, long long) { return static_cast<double>(x); });
  REQUIRE(mean == Approx(p.mean1()).epsilon(1e-6));
}

TEST_CASE("BHerm grid collapses to the origin as rates vanish",
          "[distributions]") {
  const BHermParams p(1e-8, 1e-8, 1e-8, 1e-8, 1e-8);
  const TruncatedPmfGrid grid = bherm_pmf_grid(p, 10, 10);
  REQUIRE(grid.at(0, 0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("BHerm grid mean is lambda1 + 2 lambda2 + lambda5",
          "[distributions]") {
  const BHermParams p(2.0, 1.5, 2.0, 1.5, 1.0);
  const TruncatedPmfGrid grid = bherm_pmf_grid(p, 50, 50);
  const double mean = grid.expectation(
      [](long long x, long long) { return static_cast<double>(x); });
  REQUIRE(mean == Approx(6.0).epsilon(1e-6));
}

TEST_CASE("BHerm grid normalizes at K = 50", "[distributions]") {
  const BHermParams p(0.75, 0.25, 0.5, 0.15, 0.1);
  const TruncatedPmfGrid grid = bherm_pmf_grid(p, 50, 50);
  REQUIRE(grid.mass_deficit() >= -1e-12);
  REQUIRE(grid.mass_deficit() <= 1e-10);
}

TEST_CASE("marginal row and column sums match the stated univariate laws",
          "[distributions]") {
  SECTION("BVB columns against Bin(N, a2)") {
    const BvbParams p = BvbParams::from_correlation(10, 0.35, 0.325, 0.3);
    const TruncatedPmfGrid grid = bvb_pmf_grid(p);
    const auto bin = oracles::binomial_pmf(10, p.a2(), 10);
    for (int y = 0; y <= 10; ++y) {
      double col = 0.0;
      for (int x = 0; x <= 10; ++x) col += grid.at(x, y);
      REQUIRE(col == Approx(bin[static_cast<std::size_t>(y)]).margin(1e-9));
    }
  }
  SECTION("BNB rows against NB(nu, (1 - pi.) / (1 - pi2))") {
    const BnbParams p(9.5, 0.2, 0.19, 0.02);
    const TruncatedPmfGrid grid = auto_pmf_grid(DistributionSpec(p), 1e-12);
    const auto nb = oracles::nb_pmf(9.5, p.success1(), grid.k1());
    for (int x = 0; x <= grid.k1(); ++x) {
      double row = 0.0;
      for (int y = 0; y <= grid.k2(); ++y) row += grid.at(x, y);
      REQUIRE(row == Approx(nb[static_cast<std::size_t>(x)]).margin(1e-9));
    }
  }
}

TEST_CASE("parameter-symmetric grids are symmetric matrices",
          "[distributions]") {
  const std::vector<DistributionSpec> dists = {
      BPoiParams(1.0, 1.0, 1.0),
      BvbParams::from_correlation(10, 0.2, 0.2, 0.5),
      BnbParams(5.0, 0.2, 0.2, 0.05),
      BHermParams(2.0, 1.5, 2.0, 1.5, 1.0),
  };
  for (const auto& dist : dists) {
    const TruncatedPmfGrid grid = auto_pmf_grid(dist, 1e-10);
    const int k = std::min(grid.k1(), grid.k2());
    for (int x = 0; x <= k; ++x) {
      for (int y = 0; y < x; ++y) {
        REQUIRE(std::fabs(grid.at(x, y) - grid.at(y, x)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("BVB converges to BPoi as N grows with fixed cell rates",
          "[distributions]") {
  const double l0 = 0.5;
  const double l1 = 1.0;
  const double l2 = 0.8;
  const BPoiParams target(l0, l1, l2);
  const TruncatedPmfGrid bpoi = bpoi_pmf_grid(target, 15, 15);
  auto tv_at = [&](long long n) {
    const double dn = static_cast<double>(n);
    const BvbParams p = BvbParams::from_cells(
        n, l0 / dn, l1 / dn, l2 / dn, 1.0 - (l0 + l1 + l2) / dn);
    const TruncatedPmfGrid grid = bvb_pmf_grid(p);
    double tv = 0.0;
    for (int x = 0; x <= 15; ++x) {
      for (int y = 0; y <= 15; ++y) {
        tv += std::fabs(grid.at(x, y) - bpoi.at(x, y));
      }
    }
    return 0.5 * tv;
  };
  REQUIRE(tv_at(400) < tv_at(50));
}

TEST_CASE("auto grids respect the deficit tolerance", "[distributions]") {
  const std::vector<DistributionSpec> dists = {
      BPoiParams(1.0, 5.0, 5.0),
      BnbParams(9.5, 0.2, 0.19, 0.02),
      BHermParams(1.0, 0.75, 1.25, 0.5, 1.0),
  };
  for (const auto& dist : dists) {
    const TruncatedPmfGrid grid = auto_pmf_grid(dist, 1e-12);
    REQUIRE(grid.mass_deficit() <= 1e-12);
    REQUIRE(grid.mass_deficit() >= -1e-12);
    REQUIRE_FALSE(grid.clamp_warning());
    REQUIRE(grid.min_entry() >= -1e-14);
  }
}

TEST_CASE("grid builders reject invalid windows", "[distributions]") {
  REQUIRE_THROWS_AS(bpoi_pmf_grid(BPoiParams(0.1, 1.0, 1.0), -1, 5),
                    InvalidParams);
}

TEST_CASE("seeded samplers pass a chi-squared test against their grid",
          "[distributions]") {
  struct Case {
    DistributionSpec dist;
    std::uint64_t seed;
  };
  const std::vector<Case> cases = {
      {BPoiParams(0.1, 1.25, 0.8), 101},
      {BvbParams::from_correlation(10, 0.2, 0.2, 0.5), 102},
      {BnbParams(5.0, 0.2, 0.2, 0.05), 103},
      {BHermParams(0.75, 0.25, 0.5, 0.15, 0.1), 104},
  };
  for (const Case& c : cases) {
    const BivariateSample s = sample(c.dist, 100000, c.seed);
    const TruncatedPmfGrid grid = auto_pmf_grid(c.dist, 1e-12);
    REQUIRE(sampler_chi2_p_value(s, grid) > 0.001);
  }
}

TEST_CASE("sampling is deterministic in the seed", "[distributions]") {
  const DistributionSpec dist = BnbParams(9.5, 0.2, 0.19, 0.02);
  const BivariateSample a = sample(dist, 500, 7);
  const BivariateSample b = sample(dist, 500, 7);
  const BivariateSample c = sample(dist, 500, 8);
  REQUIRE(a.pairs == b.pairs);
  REQUIRE(a.pairs != c.pairs);
}

TEST_CASE("independent BPoi components sample uncorrelated", "[distributions]") {
  const BivariateSample s = sample(BPoiParams(0.0, 1.3, 0.9), 100000, 5);
  double m1 = 0, m2 = 0, e11 = 0, e20 = 0, e02 = 0;
  for (const PairCount& p : s.pairs) {
    m1 += p.x1;
    m2 += p.x2;
    e11 += static_cast<double>(p.x1) * static_cast<double>(p.x2);
    e20 += static_cast<double>(p.x1) * static_cast<double>(p.x1);
    e02 += static_cast<double>(p.x2) * static_cast<double>(p.x2);
  }
  const double n = static_cast<double>(s.size());
  m1 /= n;
  m2 /= n;
  const double corr = (e11 / n - m1 * m2) /
                      std::sqrt((e20 / n - m1 * m1) * (e02 / n - m2 * m2));
  REQUIRE(corr == Approx(0.0).margin(0.01));
}

TEST_CASE("BNB sampler hits the marginal mean within three standard errors",
          "[distributions]") {
  const BnbParams p(9.5, 0.2, 0.19, 0.02);
  const BivariateSample s = sample(DistributionSpec(p), 100000, 2026);
  double sum = 0.0;
  double sum2 = 0.0;
  for (const PairCount& pc : s.pairs) {
    sum += static_cast<double>(pc.x1);
    sum2 += static_cast<double>(pc.x1) * static_cast<double>(pc.x1);
  }
  const double n = static_cast<double>(s.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  REQUIRE(mean == Approx(p.mean1()).margin(3.0 * sd / std::sqrt(n)));
}

TEST_CASE("BNB sampling with negative pi0 is rejected explicitly",
          "[distributions]") {
  const DistributionSpec dist = BnbParams(3.0, 0.25, 0.2, -0.03);
  REQUIRE_THROWS_AS(sample(dist, 10, 1), UnsupportedParams);
}

TEST_CASE("parameter validation catches out-of-range values", "[distributions]") {
  REQUIRE_THROWS_AS(BPoiParams(-0.1, 1.0, 1.0), InvalidParams);
  REQUIRE_THROWS_AS(BPoiParams(0.1, 0.0, 1.0), InvalidParams);
  REQUIRE_THROWS_AS(BvbParams::from_cells(10, 0.5, 0.5, 0.5, 0.5),
                    InvalidParams);
  REQUIRE_THROWS_AS(BvbParams::from_cells(0, 0.25, 0.25, 0.25, 0.25),
                    InvalidParams);
  REQUIRE_THROWS_AS(BnbParams(0.0, 0.2, 0.2, 0.0), InvalidParams);
  REQUIRE_THROWS_AS(BnbParams(1.0, 0.2, 0.2, -0.1), InvalidParams);
  REQUIRE_THROWS_AS(BnbParams(1.0, 0.5, 0.5, 0.1), InvalidParams);
  REQUIRE_THROWS_AS(BHermParams(1.0, 1.0, 0.0, 1.0, 1.0), InvalidParams);
}

TEST_CASE("distribution strings parse and reject offending tokens",
          "[distributions]") {
  const DistributionSpec d = parse_distribution("bpoi:0.5,1,1");
  REQUIRE(family(d) == Family::bpoi);
  REQUIRE(std::get<BPoiParams>(d).lambda0 == 0.5);
  REQUIRE_THROWS_WITH(parse_distribution("bpoi:0.5,oops,1"),
                      Catch::Contains("oops"));
  REQUIRE_THROWS_AS(parse_distribution("weird:1,2"), ParseError);
  REQUIRE_THROWS_AS(parse_distribution("bpoi"), ParseError);
  REQUIRE_THROWS_AS(parse_distribution("bvb:2.5,0.3,0.3,0.1"), ParseError);
}
