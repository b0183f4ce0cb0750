// SPDX-License-Identifier: Apache-2.0
//
// Parameter types of the four bivariate count families and the tagged union
// used throughout the library. Constructors validate the family's admissible
// region; accessors expose the standard derived moments.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bicount/errors.hpp"

namespace bicount {

/// Bivariate Poisson BPoi(lambda0; lambda1, lambda2): trivariate reduction
/// (Z0 + Z1, Z0 + Z2) with independent Poisson components.
struct BPoiParams {
  double lambda0;
  double lambda1;
  double lambda2;

  BPoiParams(double l0, double l1, double l2)
      : lambda0(l0), lambda1(l1), lambda2(l2) {
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) {
      throw InvalidParams("BPoi: lambda0 must be finite and >= 0");
    }
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !std::isfinite(lambda1) ||
        !std::isfinite(lambda2)) {
      throw InvalidParams("BPoi: lambda1 and lambda2 must be finite and > 0");
    }
  }

  double mean1() const { return lambda0 + lambda1; }
  double mean2() const { return lambda0 + lambda2; }
  double var1() const { return lambda0 + lambda1; }
  double var2() const { return lambda0 + lambda2; }
  double covariance() const { return lambda0; }
  double correlation() const {
    return lambda0 / std::sqrt(mean1() * mean2());
  }
};

/// Type-I bivariate binomial BVB(N; a1, a2, phi_a): sum of N iid bivariate
/// Bernoulli vectors with cell probabilities p11, p10, p01, p00.
struct BvbParams {
  long long n_trials;
  double p11;
  double p10;
  double p01;
  double p00;

  static BvbParams from_cells(long long n, double c11, double c10, double c01,
                              double c00) {
    return BvbParams(n, c11, c10, c01, c00);
  }

  /// Cells from the marginal parameterization (a1, a2, a) with a = p11.
  static BvbParams from_marginals(long long n, double a1, double a2, double a) {
    return BvbParams(n, a, a1 - a, a2 - a, 1.0 - a1 - a2 + a);
  }

  /// Cells from the correlation parameterization (a1, a2, phi_a).
  static BvbParams from_correlation(long long n, double a1, double a2,
                                    double phi) {
    if (!(a1 > 0.0 && a1 < 1.0 && a2 > 0.0 && a2 < 1.0)) {
      throw InvalidParams("BVB: a1 and a2 must lie in (0, 1)");
    }
    const double a = a1 * a2 + phi * std::sqrt(a1 * a2 * (1.0 - a1) * (1.0 - a2));
    return from_marginals(n, a1, a2, a);
  }

  double a1() const { return p10 + p11; }
  double a2() const { return p01 + p11; }
  double a() const { return p11; }
  double phi_a() const {
    return (p11 - a1() * a2()) /
           std::sqrt(a1() * a2() * (1.0 - a1()) * (1.0 - a2()));
  }
  double mean1() const { return static_cast<double>(n_trials) * a1(); }
  double mean2() const { return static_cast<double>(n_trials) * a2(); }
  double var1() const { return static_cast<double>(n_trials) * a1() * (1.0 - a1()); }
  double var2() const { return static_cast<double>(n_trials) * a2() * (1.0 - a2()); }
  double covariance() const { return phi_a() * std::sqrt(var1() * var2()); }

 private:
  BvbParams(long long n, double c11, double c10, double c01, double c00)
      : n_trials(n), p11(c11), p10(c10), p01(c01), p00(c00) {
    if (n_trials < 1) throw InvalidParams("BVB: N must be a positive integer");
    for (double* c : {&p11, &p10, &p01, &p00}) {
      if (!std::isfinite(*c) || *c < -1e-12) {
        throw InvalidParams("BVB: cell probabilities must be >= 0");
      }
      if (*c < 0.0) *c = 0.0;  // rounding noise from derived cells
    }
    const double sum = p11 + p10 + p01 + p00;
    if (std::fabs(sum - 1.0) > 1e-12) {
      throw InvalidParams("BVB: cell probabilities must sum to 1");
    }
    if (!(a1() > 0.0 && a1() < 1.0 && a2() > 0.0 && a2() < 1.0)) {
      throw InvalidParams("BVB: derived a1 and a2 must lie in (0, 1)");
    }
  }
};

/// Bivariate negative binomial BNB(nu; pi1, pi2, pi0), defined through its
/// pgf ((1 - pi.) / (1 - pi1 s - pi2 t - pi0 st))^nu.
struct BnbParams {
  double nu;
  double pi1;
  double pi2;
  double pi0;

  /// pi1 or pi2 may be exactly zero, which degenerates the matching
  /// coordinate to the univariate NB reduction.
  BnbParams(double shape, double p1, double p2, double p0)
      : nu(shape), pi1(p1), pi2(p2), pi0(p0) {
    if (!(nu > 0.0) || !std::isfinite(nu)) {
      throw InvalidParams("BNB: nu must be finite and > 0");
    }
    if (!(pi1 >= 0.0 && pi1 < 1.0 && pi2 >= 0.0 && pi2 < 1.0)) {
      throw InvalidParams("BNB: pi1 and pi2 must lie in [0, 1)");
    }
    if (!(pi0 < 1.0) || (pi0 < 0.0 && !(pi0 > -pi1 * pi2))) {
      throw InvalidParams("BNB: pi0 must lie in (-pi1*pi2, 1)");
    }
    if (!(pi_sum() < 1.0)) {
      throw InvalidParams("BNB: pi0 + pi1 + pi2 must be < 1");
    }
  }

  double pi_sum() const { return pi0 + pi1 + pi2; }
  double mean1() const { return nu * (pi0 + pi1) / (1.0 - pi_sum()); }
  double mean2() const { return nu * (pi0 + pi2) / (1.0 - pi_sum()); }
  double covariance() const {
    const double q = 1.0 - pi_sum();
    return nu * (pi0 + pi1 * pi2) / (q * q);
  }
  /// Marginal X1 ~ NB(nu, success1()), X2 ~ NB(nu, success2()).
  double success1() const { return (1.0 - pi_sum()) / (1.0 - pi2); }
  double success2() const { return (1.0 - pi_sum()) / (1.0 - pi1); }
  double var1() const { return mean1() / success1(); }
  double var2() const { return mean2() / success2(); }
};

/// Bivariate Hermite: distribution of (Z1 + 2 Z2 + Z5, Z3 + 2 Z4 + Z5) with
/// independent Poisson(lambda_i) components.
struct BHermParams {
  std::array<double, 5> lambda;

  explicit BHermParams(const std::array<double, 5>& rates) : lambda(rates) {
    for (double l : lambda) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw InvalidParams("BHerm: all five rates must be finite and > 0");
      }
    }
  }
  BHermParams(double l1, double l2, double l3, double l4, double l5)
      : BHermParams(std::array<double, 5>{l1, l2, l3, l4, l5}) {}

  double mean1() const { return lambda[0] + 2.0 * lambda[1] + lambda[4]; }
  double mean2() const { return lambda[2] + 2.0 * lambda[3] + lambda[4]; }
  double var1() const { return lambda[0] + 4.0 * lambda[1] + lambda[4]; }
  double var2() const { return lambda[2] + 4.0 * lambda[3] + lambda[4]; }
  double covariance() const { return lambda[4]; }
};

using DistributionSpec =
    std::variant<BPoiParams, BvbParams, BnbParams, BHermParams>;

enum class Family { bpoi, bvb, bnb, bherm };

inline Family family(const DistributionSpec& dist) {
  return static_cast<Family>(dist.index());
}

inline const char* family_name(Family f) {
  switch (f) {
    case Family::bpoi: return "bpoi";
    case Family::bvb: return "bvb";
    case Family::bnb: return "bnb";
    case Family::bherm: return "bherm";
  }
  return "?";
}

inline double coordinate_mean(const DistributionSpec& dist, int axis) {
  return std::visit(
      [axis](const auto& p) { return axis == 1 ? p.mean1() : p.mean2(); },
      dist);
}

inline double coordinate_sd(const DistributionSpec& dist, int axis) {
  return std::sqrt(std::visit(
      [axis](const auto& p) { return axis == 1 ? p.var1() : p.var2(); },
      dist));
}

namespace detail {

inline std::vector<double> parse_number_list(const std::string& body,
                                             const std::string& full) {
  std::vector<double> out;
  std::string token;
  std::istringstream stream(body);
  while (std::getline(stream, token, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ParseError("invalid number '" + token + "' in '" + full + "'");
    }
    if (used != token.size()) {
      throw ParseError("invalid number '" + token + "' in '" + full + "'");
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace detail

/// Parses the CLI parameter strings: bpoi:l0,l1,l2 | bvb:N,a1,a2,a |
/// bnb:nu,pi1,pi2,pi0 | bherm:l1,l2,l3,l4,l5. For bvb the fourth entry is
/// the Bernoulli cell a = p11; the remaining cells follow from (a1, a2, a).
inline DistributionSpec parse_distribution(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ParseError("distribution string '" + text +
                     "' lacks a 'family:' prefix");
  }
  const std::string fam = text.substr(0, colon);
  const auto nums = detail::parse_number_list(text.substr(colon + 1), text);
  if (fam == "bpoi") {
    if (nums.size() != 3) throw ParseError("bpoi expects 3 parameters: " + text);
    return BPoiParams(nums[0], nums[1], nums[2]);
  }
  if (fam == "bvb") {
    if (nums.size() != 4) throw ParseError("bvb expects 4 parameters: " + text);
    const double n = nums[0];
    if (n < 1.0 || n != std::floor(n)) {
      throw ParseError("bvb trial count '" + std::to_string(nums[0]) +
                       "' must be a positive integer");
    }
    return BvbParams::from_marginals(static_cast<long long>(n), nums[1],
                                     nums[2], nums[3]);
  }
  if (fam == "bnb") {
    if (nums.size() != 4) throw ParseError("bnb expects 4 parameters: " + text);
    return BnbParams(nums[0], nums[1], nums[2], nums[3]);
  }
  if (fam == "bherm") {
    if (nums.size() != 5) throw ParseError("bherm expects 5 parameters: " + text);
    return BHermParams(nums[0], nums[1], nums[2], nums[3], nums[4]);
  }
  throw ParseError("unknown distribution family '" + fam + "'");
}

inline std::string format_distribution(const DistributionSpec& dist) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BPoiParams>) {
          out << "bpoi:" << p.lambda0 << ',' << p.lambda1 << ',' << p.lambda2;
        } else if constexpr (std::is_same_v<T, BvbParams>) {
          out << "bvb:" << p.n_trials << ',' << p.a1() << ',' << p.a2() << ','
              << p.a();
        } else if constexpr (std::is_same_v<T, BnbParams>) {
          out << "bnb:" << p.nu << ',' << p.pi1 << ',' << p.pi2 << ',' << p.pi0;
        } else {
          out << "bherm:" << p.lambda[0] << ',' << p.lambda[1] << ','
              << p.lambda[2] << ',' << p.lambda[3] << ',' << p.lambda[4];
        }
      },
      dist);
  return out.str();
}

}  // namespace bicount
