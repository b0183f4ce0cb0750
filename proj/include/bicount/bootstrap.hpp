// SPDX-License-Identifier: Apache-2.0
//
// Parametric bootstrap p-values for single data sets and the warp-speed
// Monte Carlo engine for whole simulation studies. Replications are
// embarrassingly parallel: every replication owns RNG streams derived from
// (seed, replication index, purpose), and aggregation uses only counts and
// sorted quantiles, so results are identical for any worker count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bicount/errors.hpp"
#include "bicount/inference.hpp"
#include "bicount/params.hpp"
#include "bicount/rng.hpp"
#include "bicount/sampling.hpp"
#include "bicount/stein.hpp"

namespace bicount {

namespace detail {

inline unsigned worker_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("STEIN_BICOUNT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(
      std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

/// Static partition of [0, count) over the worker threads. fn(i) must only
/// touch state owned by index i.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace detail

enum class NullFamily { bpoi, bpoi_symmetric };

inline NullFamily null_family_for(const std::string& statistic_id) {
  return (statistic_id == "t2" || statistic_id == "t3")
             ? NullFamily::bpoi_symmetric
             : NullFamily::bpoi;
}

struct BootstrapConfig {
  long long replications = 10000;  // B
  double alpha = 0.05;
  std::uint64_t seed = 0;
  NullFamily null_family = NullFamily::bpoi;
};

inline bool statistic_takes_weight(const std::string& id) {
  return id != "tstar";
}

/// How a statistic's bootstrap reference distribution is consumed: upper
/// tail of a non-negative transform, or both tails of the raw value. T1
/// fluctuates around 1 with a skewed null distribution, so its two-sided
/// test is equal-tailed on the raw statistic; T2 is one-sided by build,
/// T3 folds symmetrically through |T3|, and n T* is one-sided upper.
enum class Sidedness { upper, equal_tailed };

inline Sidedness statistic_sidedness(const std::string& id) {
  return id == "t1" ? Sidedness::equal_tailed : Sidedness::upper;
}

/// Raw value of a statistic on a sample.
inline double observed_statistic(const std::string& id,
                                 const BivariateSample& sample,
                                 const WeightFunction& weight) {
  if (id == "tstar") return t_star(summarize(sample));
  if (id == "t1") return t1(sample, weight);
  if (id == "t2") return t2(sample, weight);
  if (id == "t3") return t3(sample, weight);
  throw ParseError("unknown statistic id '" + id + "'");
}

/// The value compared against bootstrap quantiles: n T* for tstar, raw T1
/// (equal-tailed), T2 as is, |T3|.
inline double transform_value(const std::string& id, double raw,
                              std::size_t n) {
  if (id == "tstar") return static_cast<double>(n) * raw;
  if (id == "t1") return raw;
  if (id == "t2") return raw;
  if (id == "t3") return std::fabs(raw);
  throw ParseError("unknown statistic id '" + id + "'");
}

inline double transform_statistic(const std::string& id,
                                  const BivariateSample& sample,
                                  const WeightFunction& weight) {
  return transform_value(id, observed_statistic(id, sample, weight),
                         sample.size());
}

/// Type-1 empirical quantile: the order statistic at index ceil(q m),
/// 1-based. Fixed so rejection rates are bit-reproducible.
inline double quantile_type1(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidParams("quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParams("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(m)));
  idx = std::min(std::max<std::size_t>(idx, 1), m);
  return values[idx - 1];
}

namespace detail {

inline BivariateSample draw_null_sample(const FittedBPoiNull& fit,
                                        std::size_t n, std::uint64_t seed,
                                        std::uint64_t index,
                                        StreamPurpose purpose) {
  RngStream rng = RngStream::derive(seed, index, purpose);
  BivariateSample out;
  out.seed = seed;
  out.source = "bootstrap";
  out.pairs.reserve(n);
  const BPoiParams params = fit.params();
  for (std::size_t i = 0; i < n; ++i) out.pairs.push_back(draw_pair(params, rng));
  return out;
}

/// Transform with the redraw-once policy: a degenerate statistic triggers
/// one redraw through `redraw`; a second failure reports nullopt.
template <class Redraw>
std::optional<double> transform_with_redraw(const std::string& id,
                                            const WeightFunction& weight,
                                            const BivariateSample& first,
                                            Redraw&& redraw,
                                            long long& failures) {
  try {
    return transform_statistic(id, first, weight);
  } catch (const DegenerateStatistic&) {
    try {
      const BivariateSample second = redraw();
      return transform_statistic(id, second, weight);
    } catch (const DegenerateStatistic&) {
      ++failures;
      return std::nullopt;
    }
  }
}

}  // namespace detail

/// Parametric bootstrap p-value: fit the null on the data, draw B samples
/// of the same size from the fit, and compare bootstrap statistics against
/// the observed one with the per-tail convention (1 + count) / (B + 1).
/// Upper-sided statistics use the single upper tail; the equal-tailed T1
/// doubles the smaller tail and caps at one. Bootstrap replications that
/// stay degenerate after one redraw count toward the non-rejection
/// direction.
inline TestReport bootstrap_p_value(const BivariateSample& sample,
                                    const std::string& statistic_id,
                                    const std::string& weight_id,
                                    const BootstrapConfig& cfg) {
  if (cfg.replications < 1) throw InvalidParams("bootstrap needs B >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw InvalidParams("alpha must lie in (0, 1)");
  }
  const WeightFunction weight = statistic_takes_weight(statistic_id)
                                    ? WeightFunction::by_id(weight_id)
                                    : WeightFunction::f1();
  const double raw = observed_statistic(statistic_id, sample, weight);
  const double observed = transform_value(statistic_id, raw, sample.size());
  const Sidedness sidedness = statistic_sidedness(statistic_id);
  const FittedBPoiNull fit = fit_bpoi_null(
      summarize(sample), cfg.null_family == NullFamily::bpoi_symmetric);
  const std::size_t b_count = static_cast<std::size_t>(cfg.replications);
  long long count_ge = 0;
  long long count_le = 0;
  long long failures = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    const BivariateSample bs = detail::draw_null_sample(
        fit, sample.size(), cfg.seed, b, StreamPurpose::boot_draw);
    const std::optional<double> t = detail::transform_with_redraw(
        statistic_id, weight, bs,
        [&] {
          return detail::draw_null_sample(fit, sample.size(), cfg.seed, b,
                                          StreamPurpose::boot_redraw);
        },
        failures);
    if (!t.has_value()) {
      ++count_ge;  // counts as extreme in every tail: never rejects
      ++count_le;
      continue;
    }
    if (*t >= observed) ++count_ge;
    if (*t <= observed) ++count_le;
  }
  const double denom = static_cast<double>(cfg.replications + 1);
  double p = static_cast<double>(1 + count_ge) / denom;
  if (sidedness == Sidedness::equal_tailed) {
    const double p_lo = static_cast<double>(1 + count_le) / denom;
    p = std::min(1.0, 2.0 * std::min(p, p_lo));
  }
  TestReport report;
  report.statistic_id = statistic_id;
  report.weight_id = statistic_takes_weight(statistic_id) ? weight.id : "";
  report.observed = raw;
  report.p_value = p;
  report.method = "bootstrap";
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  return report;
}

/// One whole warp-speed study: M Monte Carlo replications, one bootstrap
/// draw each, pooled critical values, and strict inequalities for
/// rejection. Upper-sided statistics keep critical_lower at -infinity;
/// the equal-tailed T1 splits alpha across both pooled quantiles.
struct WarpSpeedRun {
  std::string scenario;
  std::size_t n = 0;
  std::string statistic;
  std::string weight;
  long long replications = 0;  // M
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<double> stats;
  std::vector<double> boot_stats;
  double critical_lower = 0.0;
  double critical_value = 0.0;
  double rejection_rate = 0.0;
  long long degenerate_redraws = 0;
};

inline WarpSpeedRun warp_speed_study(const DistributionSpec& scenario,
                                     const std::string& scenario_label,
                                     std::size_t n,
                                     const std::string& statistic_id,
                                     const std::string& weight_id, long long m,
                                     const BootstrapConfig& cfg) {
  if (m < 100) throw InvalidParams("warp-speed study needs M >= 100");
  if (n < 2) throw InvalidParams("warp-speed study needs n >= 2");
  const WeightFunction weight = statistic_takes_weight(statistic_id)
                                    ? WeightFunction::by_id(weight_id)
                                    : WeightFunction::f1();
  const bool symmetric = cfg.null_family == NullFamily::bpoi_symmetric;
  WarpSpeedRun run;
  run.scenario = scenario_label;
  run.n = n;
  run.statistic = statistic_id;
  run.weight = statistic_takes_weight(statistic_id) ? weight.id : "";
  run.replications = m;
  run.alpha = cfg.alpha;
  run.seed = cfg.seed;
  run.stats.assign(static_cast<std::size_t>(m), 0.0);
  run.boot_stats.assign(static_cast<std::size_t>(m), 0.0);
  std::vector<long long> failures(static_cast<std::size_t>(m), 0);

  detail::parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    auto draw_scenario = [&](StreamPurpose purpose) {
      RngStream rng = RngStream::derive(cfg.seed, i, purpose);
      BivariateSample s;
      s.seed = cfg.seed;
      s.source = scenario_label;
      s.pairs.reserve(n);
      for (std::size_t k = 0; k < n; ++k) s.pairs.push_back(draw_pair(scenario, rng));
      return s;
    };
    BivariateSample mc_sample = draw_scenario(StreamPurpose::mc_draw);

    // Observed statistic; a replication that stays degenerate after one
    // redraw never rejects (NaN compares false against both critical
    // values).
    double stat_value = std::numeric_limits<double>::quiet_NaN();
    bool have_stats = false;
    SummaryStats stats;
    try {
      stats = summarize(mc_sample);
      stat_value = transform_value(
          statistic_id, observed_statistic(statistic_id, mc_sample, weight), n);
      have_stats = true;
    } catch (const DegenerateStatistic&) {
      try {
        mc_sample = draw_scenario(StreamPurpose::mc_redraw);
        stats = summarize(mc_sample);
        stat_value = transform_value(
            statistic_id, observed_statistic(statistic_id, mc_sample, weight),
            n);
        have_stats = true;
      } catch (const DegenerateStatistic&) {
        ++failures[i];
      }
    }
    run.stats[i] = stat_value;

    // One bootstrap draw from the fitted null; unresolvable degeneracy
    // contributes +inf, which can only raise the pooled critical value.
    double boot_value = std::numeric_limits<double>::infinity();
    if (have_stats) {
      const FittedBPoiNull fit = fit_bpoi_null(stats, symmetric);
      const BivariateSample boot = detail::draw_null_sample(
          fit, n, cfg.seed, i, StreamPurpose::boot_draw);
      const std::optional<double> t = detail::transform_with_redraw(
          statistic_id, weight, boot,
          [&] {
            return detail::draw_null_sample(fit, n, cfg.seed, i,
                                            StreamPurpose::boot_redraw);
          },
          failures[i]);
      if (t.has_value()) boot_value = *t;
    }
    run.boot_stats[i] = boot_value;
  });

  for (long long f : failures) run.degenerate_redraws += f;
  if (statistic_sidedness(statistic_id) == Sidedness::equal_tailed) {
    run.critical_lower = quantile_type1(run.boot_stats, cfg.alpha / 2.0);
    run.critical_value = quantile_type1(run.boot_stats, 1.0 - cfg.alpha / 2.0);
  } else {
    run.critical_lower = -std::numeric_limits<double>::infinity();
    run.critical_value = quantile_type1(run.boot_stats, 1.0 - cfg.alpha);
  }
  long long rejections = 0;
  for (double s : run.stats) {
    if (s < run.critical_lower || s > run.critical_value) ++rejections;
  }
  run.rejection_rate = static_cast<double>(rejections) / static_cast<double>(m);
  return run;
}

/// Slow cross-check for warp_speed_study: one complete bootstrap p-value per
/// Monte Carlo replication (cfg.replications plays the role of B), rejecting
/// at p <= alpha. Intended for spot validation at small M.
inline double full_bootstrap_rejection_rate(const DistributionSpec& scenario,
                                            std::size_t n,
                                            const std::string& statistic_id,
                                            const std::string& weight_id,
                                            long long m,
                                            const BootstrapConfig& cfg) {
  if (m < 1) throw InvalidParams("need at least one replication");
  std::vector<unsigned char> reject(static_cast<std::size_t>(m), 0);
  detail::parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    RngStream rng = RngStream::derive(cfg.seed, i, StreamPurpose::mc_draw);
    BivariateSample s;
    s.pairs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) s.pairs.push_back(draw_pair(scenario, rng));
    BootstrapConfig inner = cfg;
    inner.seed = RngStream::derive(cfg.seed, i, StreamPurpose::study_cell).next_u64();
    try {
      const TestReport report =
          bootstrap_p_value(s, statistic_id, weight_id, inner);
      reject[i] = report.p_value <= cfg.alpha ? 1 : 0;
    } catch (const DegenerateStatistic&) {
      reject[i] = 0;
    }
  });
  long long count = 0;
  for (unsigned char r : reject) count += r;
  return static_cast<double>(count) / static_cast<double>(m);
}

}  // namespace bicount
