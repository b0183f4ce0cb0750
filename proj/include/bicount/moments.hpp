// SPDX-License-Identifier: Apache-2.0
//
// Joint factorial moments of the BVB and BNB families through the recursive
// schemes their Stein identities induce (with the empty-product convention
// mu(0,0) = 1), plus the closed-form BPoi difference moments.

#pragma once

#include <cmath>
#include <vector>

#include "bicount/errors.hpp"
#include "bicount/params.hpp"
#include "bicount/pmf_grid.hpp"

namespace bicount {

namespace detail {

class MomentTable {
 public:
  MomentTable(int r, int s)
      : cols_(s + 1),
        values_(static_cast<std::size_t>(r + 1) * static_cast<std::size_t>(s + 1),
                0.0) {}
  double& operator()(int i, int j) {
    return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
                   static_cast<std::size_t>(j)];
  }

 private:
  int cols_;
  std::vector<double> values_;
};

}  // namespace detail

/// mu(r,s) = E[(X1)_(r) (X2)_(s)] for the BVB family. Moments with r or s
/// beyond N vanish because the falling factorial does.
inline double factorial_moment(const BvbParams& p, int r, int s) {
  if (r < 0 || s < 0) throw InvalidParams("factorial moment orders must be >= 0");
  if (r > p.n_trials || s > p.n_trials) return 0.0;
  const double n = static_cast<double>(p.n_trials);
  const double a1 = p.a1();
  const double a2 = p.a2();
  const double a = p.a();
  detail::MomentTable mu(r, s);
  mu(0, 0) = 1.0;
  for (int j = 1; j <= s; ++j) {
    mu(0, j) = (n - static_cast<double>(j - 1)) * a2 * mu(0, j - 1);
  }
  for (int i = 1; i <= r; ++i) {
    const double reach = n - static_cast<double>(i - 1);
    for (int j = 0; j <= s; ++j) {
      double v = reach * a1 * mu(i - 1, j);
      if (j >= 1) {
        v -= static_cast<double>(j) * a2 * mu(i, j - 1);
        v += reach * static_cast<double>(j) * a * mu(i - 1, j - 1);
      }
      mu(i, j) = v;
    }
  }
  return mu(r, s);
}

/// mu(r,s) for the BNB family; the base cases reproduce the marginal means
/// nu (pi0 + pi_i) / (1 - pi.) by the same arithmetic as the accessors.
inline double factorial_moment(const BnbParams& p, int r, int s) {
  if (r < 0 || s < 0) throw InvalidParams("factorial moment orders must be >= 0");
  const double q = 1.0 - p.pi_sum();
  detail::MomentTable mu(r, s);
  mu(0, 0) = 1.0;
  for (int j = 1; j <= s; ++j) {
    mu(0, j) = (p.nu + static_cast<double>(j - 1)) * (p.pi0 + p.pi2) * mu(0, j - 1) / q;
  }
  for (int i = 1; i <= r; ++i) {
    const double shape = p.nu + static_cast<double>(i - 1);
    for (int j = 0; j <= s; ++j) {
      double v = shape * (p.pi0 + p.pi1) * mu(i - 1, j);
      if (j >= 1) {
        v += static_cast<double>(j) * (p.pi0 + p.pi2) * mu(i, j - 1);
        v += shape * static_cast<double>(j) * p.pi0 * mu(i - 1, j - 1);
      }
      mu(i, j) = v / q;
    }
  }
  return mu(r, s);
}

inline double factorial_moment(const DistributionSpec& dist, int r, int s) {
  if (const auto* bvb = std::get_if<BvbParams>(&dist)) {
    return factorial_moment(*bvb, r, s);
  }
  if (const auto* bnb = std::get_if<BnbParams>(&dist)) {
    return factorial_moment(*bnb, r, s);
  }
  throw InvalidParams("factorial moment recursions cover BVB and BNB only");
}

/// E[(X1 - X2)^2] = lambda1 + lambda2 + (lambda1 - lambda2)^2.
inline double bpoi_squared_difference(const BPoiParams& p) {
  const double d = p.lambda1 - p.lambda2;
  return p.lambda1 + p.lambda2 + d * d;
}

/// E|X1 - X2| through the difference identity with f = sgn(x - y):
/// lambda1 E[sgn(X1+1-X2)] - lambda2 E[sgn(X1-X2-1)], both expectations by
/// summation over a [0..k]^2 window.
inline double bpoi_abs_difference(const BPoiParams& p, int k,
                                  double deficit_tol = 1e-10) {
  const TruncatedPmfGrid grid = bpoi_pmf_grid(p, k, k);
  if (grid.mass_deficit() > deficit_tol) {
    throw TruncationError("bpoi_abs_difference: window k=" + std::to_string(k) +
                          " leaves mass deficit " +
                          std::to_string(grid.mass_deficit()));
  }
  auto sgn = [](long long v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
  const double up = grid.expectation(
      [&](long long x, long long y) { return sgn(x + 1 - y); });
  const double down = grid.expectation(
      [&](long long x, long long y) { return sgn(x - y - 1); });
  return p.lambda1 * up - p.lambda2 * down;
}

}  // namespace bicount
