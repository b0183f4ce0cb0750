// SPDX-License-Identifier: Apache-2.0
//
// Summary statistics, moment-based null fitting, and the four test
// statistics T*, T1;f, T2;f, T3;f. All moments use the divide-by-n
// convention so the plug-in identities between moment forms hold exactly.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "bicount/errors.hpp"
#include "bicount/pmf_grid.hpp"
#include "bicount/sampling.hpp"
#include "bicount/stein.hpp"

namespace bicount {

struct SummaryStats {
  std::size_t n = 0;  // zero marks population-level moments
  double m1 = 0.0;
  double m2 = 0.0;
  double s1sq = 0.0;
  double s2sq = 0.0;
  double r = 0.0;
  double cov = 0.0;
};

inline SummaryStats summarize(const BivariateSample& sample) {
  if (sample.size() < 2) {
    throw DegenerateStatistic("summary statistics need at least two pairs");
  }
  const double n = static_cast<double>(sample.size());
  double s1 = 0.0, s2 = 0.0, s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (const PairCount& p : sample.pairs) {
    const double x = static_cast<double>(p.x1);
    const double y = static_cast<double>(p.x2);
    s1 += x;
    s2 += y;
    s11 += x * x;
    s22 += y * y;
    s12 += x * y;
  }
  SummaryStats out;
  out.n = sample.size();
  out.m1 = s1 / n;
  out.m2 = s2 / n;
  out.s1sq = s11 / n - out.m1 * out.m1;
  out.s2sq = s22 / n - out.m2 * out.m2;
  out.cov = s12 / n - out.m1 * out.m2;
  if (!(out.s1sq > 0.0) || !(out.s2sq > 0.0)) {
    throw DegenerateStatistic(
        "zero-variance coordinate: correlation undefined");
  }
  out.r = out.cov / std::sqrt(out.s1sq * out.s2sq);
  return out;
}

/// Population moments of a truncated grid, packaged in the same shape.
inline SummaryStats grid_summary(const TruncatedPmfGrid& grid) {
  const GridMoments m = grid_moments(grid);
  SummaryStats out;
  out.n = 0;
  out.m1 = m.m1;
  out.m2 = m.m2;
  out.s1sq = m.v1;
  out.s2sq = m.v2;
  out.cov = m.cov;
  out.r = m.rho;
  return out;
}

/// Moment fit of the BPoi null. The asymmetric fit follows lambda0 =
/// sqrt(m1 m2) r with lambda_i = m_i - lambda0; the symmetric fit uses
/// lambda = m (1 - r), lambda0 = m r with m = (m1 + m2) / 2. Clipping keeps
/// the rates admissible and is recorded.
struct FittedBPoiNull {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool clipped = false;

  BPoiParams params() const { return BPoiParams(lambda0, lambda1, lambda2); }
};

inline constexpr double kRateFloor = 1e-8;

inline FittedBPoiNull fit_bpoi_null(const SummaryStats& stats, bool symmetric) {
  FittedBPoiNull fit;
  if (symmetric) {
    const double m = 0.5 * (stats.m1 + stats.m2);
    const double rate = m * (1.0 - stats.r);
    const double common = m * stats.r;
    fit.lambda1 = fit.lambda2 = std::max(rate, kRateFloor);
    fit.lambda0 = std::max(common, 0.0);
    fit.clipped = rate < kRateFloor || common < 0.0;
    return fit;
  }
  const double raw0 = std::sqrt(stats.m1 * stats.m2) * stats.r;
  const double hi = std::max(0.0, std::min(stats.m1, stats.m2) - kRateFloor);
  const double l0 = std::min(std::max(raw0, 0.0), hi);
  fit.lambda0 = l0;
  fit.lambda1 = std::max(stats.m1 - l0, kRateFloor);
  fit.lambda2 = std::max(stats.m2 - l0, kRateFloor);
  fit.clipped = l0 != raw0 || stats.m1 - l0 < kRateFloor ||
                stats.m2 - l0 < kRateFloor;
  return fit;
}

/// Dispersion-index statistic T*; n T* is asymptotically chi-squared with
/// two degrees of freedom under the BPoi null.
inline double t_star(const SummaryStats& s) {
  if (!(s.m1 > 0.0) || !(s.m2 > 0.0)) {
    throw DegenerateStatistic("t_star requires positive means");
  }
  const double r2 = s.r * s.r;
  const double r4 = r2 * r2;
  if (!(r4 < 1.0)) {
    throw DegenerateStatistic("t_star undefined at |r| = 1");
  }
  const double d1 = s.s1sq - s.m1;
  const double d2 = s.s2sq - s.m2;
  const double num = s.m2 * s.m2 * d1 * d1 + s.m1 * s.m1 * d2 * d2 -
                     2.0 * s.m1 * s.m2 * d1 * d2 * r2;
  const double den = 2.0 * s.m1 * s.m1 * s.m2 * s.m2 * (1.0 - r4);
  return num / den;
}

/// Survival of chi-squared(2) at n T*: p = exp(-n T* / 2).
inline double t_star_p_value(double t_star_value, std::size_t n) {
  const double p = std::exp(-0.5 * static_cast<double>(n) * t_star_value);
  return std::min(1.0, std::max(0.0, p));
}

namespace detail {

template <class Avg>
double t1_core(Avg&& avg, double m1, double m2, double rho,
               const WeightFunction& f) {
  const double common = std::sqrt(m1 * m2) * rho;
  const double num =
      (m1 - common) * avg([&](long long x, long long y) { return f(x + 1, y); }) -
      (m2 - common) * avg([&](long long x, long long y) { return f(x, y + 1); });
  const double den = avg([&](long long x, long long y) {
    return static_cast<double>(x - y) * f(x, y);
  });
  if (den == 0.0) {
    throw DegenerateStatistic("t1 denominator E[(X1-X2) f(X1,X2)] is zero");
  }
  return num / den;
}

template <class Avg>
double t2_core(Avg&& avg, double lambda_hat, const WeightFunction& f) {
  const double a =
      avg([&](long long x, long long y) { return static_cast<double>(x) * f(x, y); }) -
      lambda_hat * avg([&](long long x, long long y) { return f(x + 1, y); });
  const double b =
      avg([&](long long x, long long y) { return static_cast<double>(y) * f(x, y); }) -
      lambda_hat * avg([&](long long x, long long y) { return f(x, y + 1); });
  return std::fabs(a) + std::fabs(b);
}

template <class Avg>
double t3_core(Avg&& avg, const WeightFunction& f) {
  if (!is_alternating(f)) {
    throw InvalidParams("t3 requires an alternating weight function");
  }
  return avg([&](long long x, long long y) { return f(x + 1, y); }) +
         avg([&](long long x, long long y) { return f(x, y + 1); });
}

template <class Sample>
auto sample_averager(const Sample& sample) {
  const double n = static_cast<double>(sample.size());
  return [&sample, n](auto&& h) {
    double total = 0.0;
    for (const PairCount& p : sample.pairs) total += h(p.x1, p.x2);
    return total / n;
  };
}

}  // namespace detail

/// Goodness-of-fit Stein index: plug-in version of
/// [lam1 E f(X1+1,X2) - lam2 E f(X1,X2+1)] / E[(X1-X2) f(X1,X2)] with
/// lam_i = m_i - sqrt(m1 m2) r; equals 1 in population under the BPoi null.
inline double t1(const BivariateSample& sample, const WeightFunction& f) {
  const SummaryStats s = summarize(sample);
  return detail::t1_core(detail::sample_averager(sample), s.m1, s.m2, s.r, f);
}

inline double t1_population(const TruncatedPmfGrid& grid,
                            const WeightFunction& f) {
  const GridMoments m = grid_moments(grid);
  return detail::t1_core([&grid](auto&& h) { return grid.expectation(h); },
                         m.m1, m.m2, m.rho, f);
}

/// Closed form of T1 for f(x, y) = x - y, a bivariate dispersion index.
inline double t1_dispersion_closed_form(const SummaryStats& s) {
  const double shift = (s.m1 - s.m2) * (s.m1 - s.m2) -
                       2.0 * std::sqrt(s.m1 * s.m2) * s.r;
  const double den = s.s1sq + s.s2sq + shift;
  if (den == 0.0) {
    throw DegenerateStatistic("dispersion index denominator is zero");
  }
  return (s.m1 + s.m2 + shift) / den;
}

/// Symmetry statistic within the BPoi family; lambda is the plug-in
/// m (1 - r) with m = (m1 + m2) / 2. Zero in population under the
/// symmetric-BPoi null.
inline double t2(const BivariateSample& sample, const WeightFunction& f) {
  const SummaryStats s = summarize(sample);
  const double lambda_hat = 0.5 * (s.m1 + s.m2) * (1.0 - s.r);
  return detail::t2_core(detail::sample_averager(sample), lambda_hat, f);
}

inline double t2_population(const TruncatedPmfGrid& grid,
                            const WeightFunction& f) {
  const GridMoments m = grid_moments(grid);
  const double lambda = 0.5 * (m.m1 + m.m2) * (1.0 - m.rho);
  return detail::t2_core([&grid](auto&& h) { return grid.expectation(h); },
                         lambda, f);
}

/// Distribution-free symmetry statistic E f(X1+1, X2) + E f(X1, X2+1);
/// zero for any symmetric bivariate distribution when f is alternating.
inline double t3(const BivariateSample& sample, const WeightFunction& f) {
  if (sample.size() < 2) {
    throw DegenerateStatistic("t3 needs at least two pairs");
  }
  return detail::t3_core(detail::sample_averager(sample), f);
}

inline double t3_population(const TruncatedPmfGrid& grid,
                            const WeightFunction& f) {
  return detail::t3_core([&grid](auto&& h) { return grid.expectation(h); }, f);
}

/// One test outcome. `replications` is the bootstrap B or the Monte Carlo M
/// depending on the method; zero for the closed-form chi-squared path.
struct TestReport {
  std::string statistic_id;
  std::string weight_id;  // empty when the statistic takes no weight
  double observed = 0.0;
  double p_value = 0.0;
  std::string method;  // "chi2" | "bootstrap" | "warp-speed"
  long long replications = 0;
  std::uint64_t seed = 0;
};

}  // namespace bicount
