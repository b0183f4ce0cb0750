// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams and the integer-variate samplers built on
// them. Every stream is addressed by (master seed, stream index, purpose
// tag), so concurrent consumers can never reorder each other's draws and any
// seeded run is reproducible bit-for-bit regardless of worker count.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "bicount/errors.hpp"

namespace bicount {

/// Purpose tags for stream derivation. Two streams with equal seed and index
/// but different purposes are independent.
enum class StreamPurpose : std::uint64_t {
  sample = 1,       // user-facing sample() draws
  mc_draw = 2,      // Monte Carlo replication sample
  mc_redraw = 3,    // one-shot redraw after a degenerate replication
  boot_draw = 4,    // bootstrap sample within a replication
  boot_redraw = 5,  // one-shot redraw of a degenerate bootstrap sample
  weight_table = 6, // table-backed random weight functions
  study_cell = 7,   // per-cell seed derivation in study tables
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Counter-based uniform generator: output i is a bijective hash of
/// (key, i). The key encodes the stream address, the counter only ever
/// increments, so the sequence is a pure function of the address.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream derive(std::uint64_t seed, std::uint64_t index,
                          StreamPurpose purpose) {
    std::uint64_t k = detail::mix64(seed + detail::kGolden);
    k = detail::mix64(k ^ (index * 0xD1B54A32D192ED03ULL + detail::kGolden));
    k = detail::mix64(
        k ^ (static_cast<std::uint64_t>(purpose) * 0x8CB92BA72F3D8DD7ULL + 1));
    return RngStream(k);
  }

  std::uint64_t next_u64() {
    return detail::mix64(key_ + (++counter_) * detail::kGolden);
  }

  /// Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe under log().
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Poisson by sequential inversion; large means are split using Poisson
  /// additivity to keep exp(-mean) in range.
  long long poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
      throw InvalidParams("poisson mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean > 100.0) {
      const double half = mean / 2.0;
      return poisson(half) + poisson(mean - half);
    }
    const double u = uniform01();
    double p = std::exp(-mean);
    double cum = p;
    long long k = 0;
    while (u > cum) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
      if (p == 0.0) break;  // u fell in the far-tail rounding gap
    }
    return k;
  }

  /// Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 boosted.
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
      throw InvalidParams("gamma requires shape > 0 and scale > 0");
    }
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v * scale;
      }
    }
  }

  /// Binomial as n Bernoulli draws; n stays small in this library.
  long long binomial(long long n, double p) {
    if (n < 0 || !(p >= 0.0) || !(p <= 1.0)) {
      throw InvalidParams("binomial requires n >= 0 and p in [0, 1]");
    }
    long long k = 0;
    for (long long i = 0; i < n; ++i) {
      if (uniform01() < p) ++k;
    }
    return k;
  }

  /// Negative binomial NB(shape, success) under the convention
  /// P(X = k) = C(shape + k - 1, k) success^shape (1 - success)^k,
  /// sampled as a gamma-Poisson mixture so non-integer shapes are exact.
  long long negative_binomial(double shape, double success) {
    if (!(shape > 0.0) || !(success > 0.0) || !(success <= 1.0)) {
      throw InvalidParams("negative_binomial requires shape > 0, success in (0, 1]");
    }
    if (success == 1.0) return 0;
    return poisson(gamma(shape, (1.0 - success) / success));
  }

  /// One draw from a four-cell categorical distribution; returns 0..3.
  int categorical4(const std::array<double, 4>& probs) {
    const double u = uniform01();
    double cum = 0.0;
    for (int i = 0; i < 3; ++i) {
      cum += probs[static_cast<std::size_t>(i)];
      if (u < cum) return i;
    }
    return 3;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bicount
