// SPDX-License-Identifier: Apache-2.0
//
// Reproducible samplers for the four families, each following its
// constructive definition: trivariate reduction for BPoi, N bivariate
// Bernoulli trials for BVB, the marginal/conditional decomposition for BNB,
// and five Poisson components for BHerm.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bicount/params.hpp"
#include "bicount/rng.hpp"

namespace bicount {

struct PairCount {
  long long x1;
  long long x2;
};

inline bool operator==(const PairCount& a, const PairCount& b) {
  return a.x1 == b.x1 && a.x2 == b.x2;
}

/// A list of observed pairs plus provenance. `seed` is zero for data read
/// from files; `source` names the sampler or the input path.
struct BivariateSample {
  std::vector<PairCount> pairs;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t size() const { return pairs.size(); }
};

inline PairCount draw_pair(const BPoiParams& p, RngStream& rng) {
  const long long z0 = rng.poisson(p.lambda0);
  return {z0 + rng.poisson(p.lambda1), z0 + rng.poisson(p.lambda2)};
}

inline PairCount draw_pair(const BvbParams& p, RngStream& rng) {
  const std::array<double, 4> cells{p.p00, p.p10, p.p01, p.p11};
  long long x1 = 0;
  long long x2 = 0;
  for (long long k = 0; k < p.n_trials; ++k) {
    switch (rng.categorical4(cells)) {
      case 1: ++x1; break;
      case 2: ++x2; break;
      case 3: ++x1; ++x2; break;
      default: break;
    }
  }
  return {x1, x2};
}

/// X2 from its NB marginal, then X1 | x2 as Bin(x2, pi0/(pi2+pi0)) plus
/// NB(nu + x2, 1 - pi1); the binomial part vanishes when pi0 = 0. The
/// construction assumes pi0 >= 0.
inline PairCount draw_pair(const BnbParams& p, RngStream& rng) {
  if (p.pi0 < 0.0) {
    throw UnsupportedParams("BNB sampling requires pi0 >= 0");
  }
  const long long x2 = rng.negative_binomial(p.nu, p.success2());
  long long x1 = rng.negative_binomial(p.nu + static_cast<double>(x2), 1.0 - p.pi1);
  if (p.pi0 > 0.0) {
    x1 += rng.binomial(x2, p.pi0 / (p.pi2 + p.pi0));
  }
  return {x1, x2};
}

inline PairCount draw_pair(const BHermParams& p, RngStream& rng) {
  const long long z5 = rng.poisson(p.lambda[4]);
  return {rng.poisson(p.lambda[0]) + 2 * rng.poisson(p.lambda[1]) + z5,
          rng.poisson(p.lambda[2]) + 2 * rng.poisson(p.lambda[3]) + z5};
}

inline PairCount draw_pair(const DistributionSpec& dist, RngStream& rng) {
  return std::visit([&rng](const auto& p) { return draw_pair(p, rng); }, dist);
}

/// n iid pairs, deterministic in (dist, n, seed).
inline BivariateSample sample(const DistributionSpec& dist, std::size_t n,
                              std::uint64_t seed) {
  if (n < 1) throw InvalidParams("sample size must be >= 1");
  BivariateSample out;
  out.seed = seed;
  out.source = "sampler:" + format_distribution(dist);
  out.pairs.reserve(n);
  RngStream rng = RngStream::derive(seed, 0, StreamPurpose::sample);
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.push_back(draw_pair(dist, rng));
  }
  return out;
}

}  // namespace bicount
