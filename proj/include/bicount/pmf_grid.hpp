// SPDX-License-Identifier: Apache-2.0
//
// Exact joint pmfs on a finite window. Each family is filled by the
// recursion its Stein characterization induces; degenerate corners that the
// recursions cannot reach (BVB with p00 = 0, BNB with pi0 < 0) fall back to
// a direct enumeration or pgf-series evaluation.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bicount/errors.hpp"
#include "bicount/params.hpp"

namespace bicount {

/// Dense joint probabilities on [0..k1] x [0..k2] plus the truncated mass.
/// Reads clamp rounding noise at zero; entries below -1e-12 set a
/// numerical-health flag instead of failing silently.
class TruncatedPmfGrid {
 public:
  TruncatedPmfGrid(int k1, int k2)
      : k1_(k1), k2_(k2),
        probs_(static_cast<std::size_t>(k1 + 1) * static_cast<std::size_t>(k2 + 1),
               0.0) {
    if (k1 < 0 || k2 < 0) throw InvalidParams("grid extents must be >= 0");
    if (probs_.size() > (std::size_t{1} << 26)) {
      throw InvalidParams("grid window too large");
    }
  }

  int k1() const { return k1_; }
  int k2() const { return k2_; }

  double at(long long x, long long y) const {
    if (x < 0 || y < 0 || x > k1_ || y > k2_) return 0.0;
    const double p = probs_[index(static_cast<int>(x), static_cast<int>(y))];
    return p > 0.0 ? p : 0.0;
  }

  double mass_deficit() const { return deficit_; }
  double min_entry() const { return min_entry_; }
  bool clamp_warning() const { return min_entry_ < -1e-12; }
  const std::string& method() const { return method_; }

  /// Truncated expectation of f over the window.
  template <class F>
  double expectation(F&& f) const {
    double total = 0.0;
    for (int x = 0; x <= k1_; ++x) {
      for (int y = 0; y <= k2_; ++y) {
        const double p = probs_[index(x, y)];
        if (p > 0.0) total += f(static_cast<long long>(x), static_cast<long long>(y)) * p;
      }
    }
    return total;
  }

  // Builder access.
  double& cell(int x, int y) { return probs_[index(x, y)]; }

  void finalize(std::string method) {
    method_ = std::move(method);
    double sum = 0.0;
    min_entry_ = 0.0;
    for (double p : probs_) {
      min_entry_ = std::min(min_entry_, p);
      if (p > 0.0) sum += p;
    }
    deficit_ = 1.0 - sum;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(k2_ + 1) +
           static_cast<std::size_t>(y);
  }

  int k1_;
  int k2_;
  std::vector<double> probs_;
  double deficit_ = 1.0;
  double min_entry_ = 0.0;
  std::string method_;
};

namespace detail {

inline std::vector<double> poisson_pmf(double lambda, int kmax) {
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1, 0.0);
  p[0] = std::exp(-lambda);
  for (int k = 1; k <= kmax; ++k) {
    p[static_cast<std::size_t>(k)] =
        p[static_cast<std::size_t>(k - 1)] * lambda / static_cast<double>(k);
  }
  return p;
}

/// log(x!) table, 0..n.
inline std::vector<double> log_factorials(int n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    lf[static_cast<std::size_t>(i)] =
        lf[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));
  }
  return lf;
}

/// BVB pmf by summation over the multinomial cell counts; handles zero cells.
inline TruncatedPmfGrid bvb_enumeration_grid(const BvbParams& p) {
  const int n = static_cast<int>(p.n_trials);
  TruncatedPmfGrid grid(n, n);
  const auto lf = log_factorials(n);
  const double logs[4] = {
      p.p11 > 0.0 ? std::log(p.p11) : 0.0, p.p10 > 0.0 ? std::log(p.p10) : 0.0,
      p.p01 > 0.0 ? std::log(p.p01) : 0.0, p.p00 > 0.0 ? std::log(p.p00) : 0.0};
  const bool zero[4] = {p.p11 == 0.0, p.p10 == 0.0, p.p01 == 0.0, p.p00 == 0.0};
  for (int x = 0; x <= n; ++x) {
    for (int y = 0; y <= n; ++y) {
      double total = 0.0;
      const int lo = std::max(0, x + y - n);
      const int hi = std::min(x, y);
      for (int c11 = lo; c11 <= hi; ++c11) {
        const int c10 = x - c11;
        const int c01 = y - c11;
        const int c00 = n - c11 - c10 - c01;
        if ((zero[0] && c11 > 0) || (zero[1] && c10 > 0) ||
            (zero[2] && c01 > 0) || (zero[3] && c00 > 0)) {
          continue;
        }
        double lt = lf[static_cast<std::size_t>(n)] -
                    lf[static_cast<std::size_t>(c11)] -
                    lf[static_cast<std::size_t>(c10)] -
                    lf[static_cast<std::size_t>(c01)] -
                    lf[static_cast<std::size_t>(c00)];
        if (c11 > 0) lt += c11 * logs[0];
        if (c10 > 0) lt += c10 * logs[1];
        if (c01 > 0) lt += c01 * logs[2];
        if (c00 > 0) lt += c00 * logs[3];
        total += std::exp(lt);
      }
      grid.cell(x, y) = total;
    }
  }
  grid.finalize("enumeration");
  return grid;
}

/// BNB pmf from the pgf power series: the coefficient of s^x t^y in
/// (1-pi.)^nu (1 - pi1 s - pi2 t - pi0 st)^(-nu) collapses to a single sum
/// over the mixed power k. Valid for pi0 of either sign.
inline TruncatedPmfGrid bnb_series_grid(const BnbParams& p, int k1, int k2) {
  TruncatedPmfGrid grid(k1, k2);
  const int m_max = k1 + k2;
  const auto lf = log_factorials(std::max(k1, k2));
  std::vector<double> log_rising(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (int m = 1; m <= m_max; ++m) {
    log_rising[static_cast<std::size_t>(m)] =
        log_rising[static_cast<std::size_t>(m - 1)] +
        std::log(p.nu + static_cast<double>(m - 1));
  }
  const double log_norm = p.nu * std::log(1.0 - p.pi_sum());
  const double l1 = std::log(p.pi1);
  const double l2 = std::log(p.pi2);
  const double l0 = p.pi0 != 0.0 ? std::log(std::fabs(p.pi0)) : 0.0;
  for (int x = 0; x <= k1; ++x) {
    for (int y = 0; y <= k2; ++y) {
      double total = 0.0;
      const int kmax = std::min(x, y);
      for (int k = 0; k <= kmax; ++k) {
        if (k > 0 && p.pi0 == 0.0) break;
        const int m = x + y - k;
        double lt = log_norm + log_rising[static_cast<std::size_t>(m)] -
                    lf[static_cast<std::size_t>(x - k)] -
                    lf[static_cast<std::size_t>(y - k)] -
                    lf[static_cast<std::size_t>(k)] + (x - k) * l1 +
                    (y - k) * l2 + k * l0;
        double term = std::exp(lt);
        if (p.pi0 < 0.0 && (k % 2) == 1) term = -term;
        total += term;
      }
      grid.cell(x, y) = total;
    }
  }
  grid.finalize("series");
  return grid;
}

}  // namespace detail

/// BPoi pmf via the recursion x p(x,y) = l1 p(x-1,y) + l0 p(x-1,y-1); the
/// x = 0 column uses the mirror identity in y.
inline TruncatedPmfGrid bpoi_pmf_grid(const BPoiParams& p, int k1, int k2) {
  TruncatedPmfGrid grid(k1, k2);
  grid.cell(0, 0) = std::exp(-p.lambda0 - p.lambda1 - p.lambda2);
  for (int y = 1; y <= k2; ++y) {
    grid.cell(0, y) = p.lambda2 * grid.cell(0, y - 1) / static_cast<double>(y);
  }
  for (int x = 1; x <= k1; ++x) {
    for (int y = 0; y <= k2; ++y) {
      double v = p.lambda1 * grid.cell(x - 1, y);
      if (y >= 1) v += p.lambda0 * grid.cell(x - 1, y - 1);
      grid.cell(x, y) = v / static_cast<double>(x);
    }
  }
  grid.finalize("recursion");
  return grid;
}

/// BVB pmf on its full support [0..N]^2. The Stein-derived recursion divides
/// by p00, so p00 = 0 routes to the enumeration path.
inline TruncatedPmfGrid bvb_pmf_grid(const BvbParams& p) {
  if (p.p00 == 0.0) return detail::bvb_enumeration_grid(p);
  const int n = static_cast<int>(p.n_trials);
  TruncatedPmfGrid grid(n, n);
  grid.cell(0, 0) = std::pow(p.p00, static_cast<double>(n));
  for (int y = 1; y <= n; ++y) {
    grid.cell(0, y) = p.p01 * static_cast<double>(n - y + 1) *
                      grid.cell(0, y - 1) / (p.p00 * static_cast<double>(y));
  }
  for (int x = 1; x <= n; ++x) {
    const double reach = static_cast<double>(n - x + 1);
    for (int y = 0; y <= n; ++y) {
      double v = p.p10 * reach * grid.cell(x - 1, y);
      if (y >= 1) {
        v += p.p11 * reach * grid.cell(x - 1, y - 1);
        v -= p.p01 * static_cast<double>(x) * grid.cell(x, y - 1);
      }
      grid.cell(x, y) = v / (p.p00 * static_cast<double>(x));
    }
  }
  grid.finalize("recursion");
  return grid;
}

/// BNB pmf via x p(x,y) = pi2 x p(x,y-1) + (nu+x-1)[pi1 p(x-1,y) +
/// pi0 p(x-1,y-1)]; the x = 0 column uses the mirror identity. Negative pi0
/// makes the recursion alternate in sign, so it routes to the series path.
inline TruncatedPmfGrid bnb_pmf_grid(const BnbParams& p, int k1, int k2) {
  if (p.pi0 < 0.0) return detail::bnb_series_grid(p, k1, k2);
  TruncatedPmfGrid grid(k1, k2);
  grid.cell(0, 0) = std::exp(p.nu * std::log(1.0 - p.pi_sum()));
  for (int y = 1; y <= k2; ++y) {
    grid.cell(0, y) = p.pi2 * (p.nu + static_cast<double>(y - 1)) *
                      grid.cell(0, y - 1) / static_cast<double>(y);
  }
  for (int x = 1; x <= k1; ++x) {
    const double shape = p.nu + static_cast<double>(x - 1);
    for (int y = 0; y <= k2; ++y) {
      double v = shape * p.pi1 * grid.cell(x - 1, y);
      if (y >= 1) v += shape * p.pi0 * grid.cell(x - 1, y - 1);
      v /= static_cast<double>(x);
      if (y >= 1) v += p.pi2 * grid.cell(x, y - 1);
      grid.cell(x, y) = v;
    }
  }
  grid.finalize("recursion");
  return grid;
}

/// BHerm pmf by direct truncated summation over (z2, z4, z5): the pmfs of
/// Z1 + 2 Z2 and Z3 + 2 Z4 are convolved against the shared Z5 component.
inline TruncatedPmfGrid bherm_pmf_grid(const BHermParams& p, int k1, int k2) {
  TruncatedPmfGrid grid(k1, k2);
  const auto p1 = detail::poisson_pmf(p.lambda[0], k1);
  const auto p2 = detail::poisson_pmf(p.lambda[1], k1 / 2);
  const auto p3 = detail::poisson_pmf(p.lambda[2], k2);
  const auto p4 = detail::poisson_pmf(p.lambda[3], k2 / 2);
  const auto p5 = detail::poisson_pmf(p.lambda[4], std::min(k1, k2));

  std::vector<double> a(static_cast<std::size_t>(k1) + 1, 0.0);
  for (int u = 0; u <= k1; ++u) {
    double s = 0.0;
    for (int z2 = 0; 2 * z2 <= u; ++z2) {
      s += p2[static_cast<std::size_t>(z2)] *
           p1[static_cast<std::size_t>(u - 2 * z2)];
    }
    a[static_cast<std::size_t>(u)] = s;
  }
  std::vector<double> b(static_cast<std::size_t>(k2) + 1, 0.0);
  for (int v = 0; v <= k2; ++v) {
    double s = 0.0;
    for (int z4 = 0; 2 * z4 <= v; ++z4) {
      s += p4[static_cast<std::size_t>(z4)] *
           p3[static_cast<std::size_t>(v - 2 * z4)];
    }
    b[static_cast<std::size_t>(v)] = s;
  }
  for (int x = 0; x <= k1; ++x) {
    for (int y = 0; y <= k2; ++y) {
      double s = 0.0;
      const int zmax = std::min(x, y);
      for (int z5 = 0; z5 <= zmax; ++z5) {
        s += p5[static_cast<std::size_t>(z5)] *
             a[static_cast<std::size_t>(x - z5)] *
             b[static_cast<std::size_t>(y - z5)];
      }
      grid.cell(x, y) = s;
    }
  }
  grid.finalize("convolution");
  return grid;
}

inline TruncatedPmfGrid pmf_grid(const DistributionSpec& dist, int k1, int k2) {
  return std::visit(
      [&](const auto& p) -> TruncatedPmfGrid {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BPoiParams>) {
          return bpoi_pmf_grid(p, k1, k2);
        } else if constexpr (std::is_same_v<T, BvbParams>) {
          return bvb_pmf_grid(p);
        } else if constexpr (std::is_same_v<T, BnbParams>) {
          return bnb_pmf_grid(p, k1, k2);
        } else {
          return bherm_pmf_grid(p, k1, k2);
        }
      },
      dist);
}

struct Window {
  int k1;
  int k2;
};

inline constexpr int kWindowCap = 500;

/// Default truncation window: mean + 12 sd per coordinate, floored at 10 and
/// capped at kWindowCap. BVB windows are the exact support.
inline Window default_window(const DistributionSpec& dist) {
  if (const auto* bvb = std::get_if<BvbParams>(&dist)) {
    const int n = static_cast<int>(bvb->n_trials);
    return {n, n};
  }
  auto extent = [&](int axis) {
    const double k =
        coordinate_mean(dist, axis) + 12.0 * coordinate_sd(dist, axis);
    return std::min(kWindowCap, std::max(10, static_cast<int>(std::ceil(k))));
  };
  return {extent(1), extent(2)};
}

/// Builds a grid whose mass deficit is at or below deficit_tol, growing the
/// default window if needed. A breach that survives the window cap is an
/// error, not a silent approximation.
inline TruncatedPmfGrid auto_pmf_grid(const DistributionSpec& dist,
                                      double deficit_tol = 1e-10) {
  Window w = default_window(dist);
  for (;;) {
    TruncatedPmfGrid grid = pmf_grid(dist, w.k1, w.k2);
    if (grid.mass_deficit() <= deficit_tol) return grid;
    if (w.k1 >= kWindowCap && w.k2 >= kWindowCap) {
      throw TruncationError("mass deficit " +
                            std::to_string(grid.mass_deficit()) +
                            " above tolerance at the window cap");
    }
    w.k1 = std::min(kWindowCap, w.k1 + w.k1 / 2 + 4);
    w.k2 = std::min(kWindowCap, w.k2 + w.k2 / 2 + 4);
  }
}

struct GridMoments {
  double m1;
  double m2;
  double v1;
  double v2;
  double cov;
  double rho;
};

inline GridMoments grid_moments(const TruncatedPmfGrid& grid) {
  GridMoments m{};
  m.m1 = grid.expectation([](long long x, long long) { return static_cast<double>(x); });
  m.m2 = grid.expectation([](long long, long long y) { return static_cast<double>(y); });
  const double e11 = grid.expectation(
      [](long long x, long long y) { return static_cast<double>(x) * static_cast<double>(y); });
  const double e20 = grid.expectation(
      [](long long x, long long) { return static_cast<double>(x) * static_cast<double>(x); });
  const double e02 = grid.expectation(
      [](long long, long long y) { return static_cast<double>(y) * static_cast<double>(y); });
  m.v1 = e20 - m.m1 * m.m1;
  m.v2 = e02 - m.m2 * m.m2;
  m.cov = e11 - m.m1 * m.m2;
  m.rho = m.cov / std::sqrt(m.v1 * m.v2);
  return m;
}

}  // namespace bicount
