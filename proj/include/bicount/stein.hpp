// SPDX-License-Identifier: Apache-2.0
//
// Weight functions and two-sided evaluation of every Stein identity in the
// library, either exactly against a truncated pmf grid or empirically
// against a sample. Shifted arguments such as f(X1+1, X2+1) are always
// realized by shifting the function, never by re-indexing the grid.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "bicount/errors.hpp"
#include "bicount/params.hpp"
#include "bicount/pmf_grid.hpp"
#include "bicount/rng.hpp"
#include "bicount/sampling.hpp"

namespace bicount {

/// A named bounded test function on N0 x N0.
struct WeightFunction {
  std::string id;
  std::function<double(long long, long long)> fn;

  double operator()(long long x, long long y) const { return fn(x, y); }

  /// f1(x, y) = x - y.
  static WeightFunction f1() {
    return {"f1", [](long long x, long long y) {
              return static_cast<double>(x - y);
            }};
  }

  /// f05(x, y) = sqrt(x) - sqrt(y).
  static WeightFunction f05() {
    return {"f05", [](long long x, long long y) {
              return std::sqrt(static_cast<double>(x)) -
                     std::sqrt(static_cast<double>(y));
            }};
  }

  static WeightFunction sign_diff() {
    return {"sgn", [](long long x, long long y) {
              return x > y ? 1.0 : (x < y ? -1.0 : 0.0);
            }};
  }

  /// s^x t^y for |s|, |t| < 1.
  static WeightFunction monomial(double s, double t) {
    if (!(std::fabs(s) < 1.0) || !(std::fabs(t) < 1.0)) {
      throw InvalidParams("monomial weight requires |s|, |t| < 1");
    }
    std::ostringstream id;
    id << "mono:" << s << ',' << t;
    return {id.str(), [s, t](long long x, long long y) {
              return std::pow(s, static_cast<double>(x)) *
                     std::pow(t, static_cast<double>(y));
            }};
  }

  static WeightFunction indicator(long long x0, long long y0) {
    std::ostringstream id;
    id << "ind:" << x0 << ',' << y0;
    return {id.str(), [x0, y0](long long x, long long y) {
              return (x == x0 && y == y0) ? 1.0 : 0.0;
            }};
  }

  /// Table of iid Uniform[-1, 1] values on [0..extent]^2, fixed by seed;
  /// zero outside the table, hence bounded everywhere.
  static WeightFunction random_table(std::uint64_t seed, long long extent) {
    RngStream rng = RngStream::derive(seed, 0, StreamPurpose::weight_table);
    const std::size_t side = static_cast<std::size_t>(extent) + 1;
    auto table = std::make_shared<std::vector<double>>(side * side);
    for (double& v : *table) v = 2.0 * rng.uniform01() - 1.0;
    std::ostringstream id;
    id << "table:" << seed;
    return {id.str(), [table, extent, side](long long x, long long y) {
              if (x < 0 || y < 0 || x > extent || y > extent) return 0.0;
              return (*table)[static_cast<std::size_t>(x) * side +
                              static_cast<std::size_t>(y)];
            }};
  }

  /// The two weights exposed on the CLI.
  static WeightFunction by_id(const std::string& id) {
    if (id == "f1") return f1();
    if (id == "f05") return f05();
    throw ParseError("unknown weight id '" + id + "' (expected f1 or f05)");
  }
};

/// Checks f(x, y) = -f(y, x) on the probe window [0..extent]^2.
inline bool is_alternating(const WeightFunction& f, long long extent = 10) {
  for (long long x = 0; x <= extent; ++x) {
    for (long long y = x; y <= extent; ++y) {
      if (std::fabs(f(x, y) + f(y, x)) > 1e-12) return false;
    }
  }
  return true;
}

enum class IdentityId { bpoi1, bpoi2, bpoi_diff, bvb1, bvb2, bnb1, bnb2 };

inline const char* to_string(IdentityId id) {
  switch (id) {
    case IdentityId::bpoi1: return "BPoi-1";
    case IdentityId::bpoi2: return "BPoi-2";
    case IdentityId::bpoi_diff: return "BPoi-diff";
    case IdentityId::bvb1: return "BVB-1";
    case IdentityId::bvb2: return "BVB-2";
    case IdentityId::bnb1: return "BNB-1";
    case IdentityId::bnb2: return "BNB-2";
  }
  return "?";
}

inline std::vector<IdentityId> identities_for(Family f) {
  switch (f) {
    case Family::bpoi:
      return {IdentityId::bpoi1, IdentityId::bpoi2, IdentityId::bpoi_diff};
    case Family::bvb:
      return {IdentityId::bvb1, IdentityId::bvb2};
    case Family::bnb:
      return {IdentityId::bnb1, IdentityId::bnb2};
    case Family::bherm:
      return {};
  }
  return {};
}

inline Family family_of(IdentityId id) {
  switch (id) {
    case IdentityId::bpoi1:
    case IdentityId::bpoi2:
    case IdentityId::bpoi_diff:
      return Family::bpoi;
    case IdentityId::bvb1:
    case IdentityId::bvb2:
      return Family::bvb;
    case IdentityId::bnb1:
    case IdentityId::bnb2:
      return Family::bnb;
  }
  return Family::bherm;
}

/// Both sides of one identity evaluation. Residuals are reported raw
/// (lhs - rhs); they are only comparable against a tolerance while the
/// recorded mass deficit stays below it.
struct IdentityResidual {
  std::string identity_id;
  std::string weight_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double mass_deficit = 0.0;
};

namespace detail {

template <class Avg>
IdentityResidual eval_identity_core(const DistributionSpec& params,
                                    IdentityId id, const WeightFunction& f,
                                    Avg&& avg, double deficit) {
  if (family_of(id) != family(params)) {
    throw InvalidParams(std::string("identity ") + to_string(id) +
                        " does not apply to family " +
                        family_name(family(params)));
  }
  const auto dx = [](long long x, long long) { return static_cast<double>(x); };
  const auto dy = [](long long, long long y) { return static_cast<double>(y); };
  double lhs = 0.0;
  double rhs = 0.0;
  switch (id) {
    case IdentityId::bpoi1: {
      const auto& p = std::get<BPoiParams>(params);
      lhs = avg([&](long long x, long long y) { return dx(x, y) * f(x, y); });
      rhs = p.lambda1 * avg([&](long long x, long long y) { return f(x + 1, y); }) +
            p.lambda0 * avg([&](long long x, long long y) { return f(x + 1, y + 1); });
      break;
    }
    case IdentityId::bpoi2: {
      const auto& p = std::get<BPoiParams>(params);
      lhs = avg([&](long long x, long long y) { return dy(x, y) * f(x, y); });
      rhs = p.lambda2 * avg([&](long long x, long long y) { return f(x, y + 1); }) +
            p.lambda0 * avg([&](long long x, long long y) { return f(x + 1, y + 1); });
      break;
    }
    case IdentityId::bpoi_diff: {
      const auto& p = std::get<BPoiParams>(params);
      lhs = avg([&](long long x, long long y) {
        return static_cast<double>(x - y) * f(x, y);
      });
      rhs = p.lambda1 * avg([&](long long x, long long y) { return f(x + 1, y); }) -
            p.lambda2 * avg([&](long long x, long long y) { return f(x, y + 1); });
      break;
    }
    case IdentityId::bvb1: {
      const auto& p = std::get<BvbParams>(params);
      const double n = static_cast<double>(p.n_trials);
      lhs = p.p00 * avg([&](long long x, long long y) { return dx(x, y) * f(x, y); }) +
            p.p01 * avg([&](long long x, long long y) { return dx(x, y) * f(x, y + 1); });
      rhs = p.p10 * avg([&](long long x, long long y) {
              return (n - dx(x, y)) * f(x + 1, y);
            }) +
            p.p11 * avg([&](long long x, long long y) {
              return (n - dx(x, y)) * f(x + 1, y + 1);
            });
      break;
    }
    case IdentityId::bvb2: {
      const auto& p = std::get<BvbParams>(params);
      const double n = static_cast<double>(p.n_trials);
      lhs = p.p00 * avg([&](long long x, long long y) { return dy(x, y) * f(x, y); }) +
            p.p10 * avg([&](long long x, long long y) { return dy(x, y) * f(x + 1, y); });
      rhs = p.p01 * avg([&](long long x, long long y) {
              return (n - dy(x, y)) * f(x, y + 1);
            }) +
            p.p11 * avg([&](long long x, long long y) {
              return (n - dy(x, y)) * f(x + 1, y + 1);
            });
      break;
    }
    case IdentityId::bnb1: {
      const auto& p = std::get<BnbParams>(params);
      lhs = avg([&](long long x, long long y) { return dx(x, y) * f(x, y); }) -
            p.pi2 * avg([&](long long x, long long y) { return dx(x, y) * f(x, y + 1); });
      rhs = p.pi1 * avg([&](long long x, long long y) {
              return (p.nu + dx(x, y)) * f(x + 1, y);
            }) +
            p.pi0 * avg([&](long long x, long long y) {
              return (p.nu + dx(x, y)) * f(x + 1, y + 1);
            });
      break;
    }
    case IdentityId::bnb2: {
      const auto& p = std::get<BnbParams>(params);
      lhs = avg([&](long long x, long long y) { return dy(x, y) * f(x, y); }) -
            p.pi1 * avg([&](long long x, long long y) { return dy(x, y) * f(x + 1, y); });
      rhs = p.pi2 * avg([&](long long x, long long y) {
              return (p.nu + dy(x, y)) * f(x, y + 1);
            }) +
            p.pi0 * avg([&](long long x, long long y) {
              return (p.nu + dy(x, y)) * f(x + 1, y + 1);
            });
      break;
    }
  }
  return {to_string(id), f.id, lhs, rhs, lhs - rhs, deficit};
}

}  // namespace detail

/// Truncated-grid expectations of both sides. The grid must have been built
/// from `dist` for the residual to carry meaning.
inline IdentityResidual eval_identity_exact(const DistributionSpec& dist,
                                            IdentityId id,
                                            const WeightFunction& f,
                                            const TruncatedPmfGrid& grid) {
  return detail::eval_identity_core(
      dist, id, f, [&grid](auto&& h) { return grid.expectation(h); },
      grid.mass_deficit());
}

/// Every expectation replaced by a sample average; the residual is the
/// plug-in Stein discrepancy used by the downstream tests.
inline IdentityResidual eval_identity_empirical(const BivariateSample& sample,
                                                IdentityId id,
                                                const WeightFunction& f,
                                                const DistributionSpec& params) {
  if (sample.size() == 0) {
    throw DegenerateStatistic("empirical identity needs a non-empty sample");
  }
  const double n = static_cast<double>(sample.size());
  auto avg = [&sample, n](auto&& h) {
    double total = 0.0;
    for (const PairCount& p : sample.pairs) total += h(p.x1, p.x2);
    return total / n;
  };
  return detail::eval_identity_core(params, id, f, avg, 0.0);
}

/// Residual of the univariate Stein identity induced by f(x, y) = g(x)
/// (axis 1) or f(x, y) = g(y) (axis 2): Poisson for BPoi marginals, binomial
/// for BVB, negative binomial for BNB.
inline IdentityResidual univariate_reduction_check(
    const DistributionSpec& dist, const std::function<double(long long)>& g,
    int axis, const TruncatedPmfGrid& grid) {
  if (axis != 1 && axis != 2) throw InvalidParams("axis must be 1 or 2");
  auto coord = [axis](long long x, long long y) { return axis == 1 ? x : y; };
  auto ex = [&](auto&& h) { return grid.expectation(h); };
  const double e_xg = ex([&](long long x, long long y) {
    return static_cast<double>(coord(x, y)) * g(coord(x, y));
  });
  const double e_g1 = ex([&](long long x, long long y) { return g(coord(x, y) + 1); });
  double lhs = 0.0;
  double rhs = 0.0;
  std::string label;
  if (const auto* p = std::get_if<BPoiParams>(&dist)) {
    lhs = e_xg;
    rhs = (axis == 1 ? p->lambda0 + p->lambda1 : p->lambda0 + p->lambda2) * e_g1;
    label = "Poi";
  } else if (const auto* p = std::get_if<BvbParams>(&dist)) {
    const double ai = axis == 1 ? p->a1() : p->a2();
    const double n = static_cast<double>(p->n_trials);
    lhs = (1.0 - ai) * e_xg;
    rhs = ai * ex([&](long long x, long long y) {
      return (n - static_cast<double>(coord(x, y))) * g(coord(x, y) + 1);
    });
    label = "Bin";
  } else if (const auto* p = std::get_if<BnbParams>(&dist)) {
    const double pi_other = axis == 1 ? p->pi2 : p->pi1;
    const double pi_own = axis == 1 ? p->pi1 : p->pi2;
    lhs = (1.0 - pi_other) * e_xg;
    rhs = (pi_own + p->pi0) * ex([&](long long x, long long y) {
      return (p->nu + static_cast<double>(coord(x, y))) * g(coord(x, y) + 1);
    });
    label = "NB";
  } else {
    throw InvalidParams("no univariate Stein reduction for the BHerm family");
  }
  return {label + "-axis" + std::to_string(axis), "g", lhs, rhs, lhs - rhs,
          grid.mass_deficit()};
}

inline std::string residual_csv_header() {
  return "identity,f_id,lhs,rhs,residual";
}

inline std::string to_csv_row(const IdentityResidual& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.identity_id << ',' << r.weight_id << ',' << r.lhs << ',' << r.rhs
      << ',' << r.residual;
  return out.str();
}

}  // namespace bicount
