// SPDX-License-Identifier: Apache-2.0
//
// The fourteen simulation scenarios and batch runners that regenerate the
// goodness-of-fit and symmetry rejection-rate tables as machine-readable
// artifacts.

#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bicount/bootstrap.hpp"
#include "bicount/errors.hpp"
#include "bicount/params.hpp"

namespace bicount {

struct Scenario {
  std::string id;
  DistributionSpec dist;
  bool is_null_gof = false;       // satisfies the BPoi null
  bool is_null_symmetry = false;  // satisfies the symmetric-BPoi null
};

/// The scenario list, verbatim. The BVB entries carry the correlation
/// parameterization (third argument phi_a); cells are derived and validated
/// at load.
inline const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> scenarios = {
      {"BPoi-1", BPoiParams(0.1, 1.25, 0.8), true, false},
      {"BPoi-2", BPoiParams(1.0, 5.0, 5.0), true, true},
      {"BPoi-3", BPoiParams(0.1, 0.2, 0.3), true, false},
      {"BPoi-4", BPoiParams(1.0, 2.5, 2.25), true, false},
      {"BPoi-5", BPoiParams(1.0, 1.0, 1.0), true, true},
      {"BPoi-6", BPoiParams(0.8, 0.2, 0.3), true, false},
      {"BPoi-7", BPoiParams(4.0, 1.0, 1.0), true, true},
      {"BHerm-1", BHermParams(0.75, 0.25, 0.5, 0.15, 0.1), false, false},
      {"BHerm-2", BHermParams(1.0, 0.75, 1.25, 0.5, 1.0), false, false},
      {"BHerm-3", BHermParams(2.0, 1.5, 2.0, 1.5, 1.0), false, false},
      {"BVB-1", BvbParams::from_correlation(10, 0.35, 0.325, 0.3), false, false},
      {"BVB-2", BvbParams::from_correlation(10, 0.2, 0.2, 0.5), false, false},
      {"BNB-1", BnbParams(9.5, 0.2, 0.19, 0.02), false, false},
      {"BNB-2", BnbParams(5.0, 0.2, 0.2, 0.05), false, false},
  };
  return scenarios;
}

inline const Scenario& find_scenario(const std::string& id) {
  for (const Scenario& s : registry()) {
    if (s.id == id) return s;
  }
  throw InvalidParams("unknown scenario id '" + id + "'");
}

struct StudyCell {
  std::string scenario;
  std::size_t n = 0;
  std::string statistic;
  std::string weight;  // empty for tstar
  double rejection_rate = 0.0;
};

struct StudyTable {
  std::string table_id;  // "gof" | "symmetry"
  std::vector<StudyCell> cells;
  long long replications = 0;  // M
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool tstar_chi2 = false;
};

struct StudyOptions {
  /// Run the tstar column on the closed-form chi-squared(2) asymptotics
  /// instead of warp-speed.
  bool tstar_chi2 = true;
};

namespace detail {

inline std::uint64_t cell_seed(std::uint64_t master, std::size_t scenario_idx,
                               std::size_t stat_idx, std::size_t n) {
  RngStream s = RngStream::derive(
      master, (static_cast<std::uint64_t>(scenario_idx) << 32) ^
                  (static_cast<std::uint64_t>(stat_idx) << 20) ^ n,
      StreamPurpose::study_cell);
  return s.next_u64();
}

/// Rejection rate of the tstar test run on chi-squared(2) critical values:
/// reject when exp(-n T* / 2) < alpha. Degenerate replications are redrawn
/// once, then count as non-rejections.
inline double tstar_chi2_rejection_rate(const DistributionSpec& dist,
                                        std::size_t n, long long m,
                                        double alpha, std::uint64_t seed) {
  std::vector<unsigned char> reject(static_cast<std::size_t>(m), 0);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    auto draw = [&](StreamPurpose purpose) {
      RngStream rng = RngStream::derive(seed, i, purpose);
      BivariateSample s;
      s.pairs.reserve(n);
      for (std::size_t k = 0; k < n; ++k) s.pairs.push_back(draw_pair(dist, rng));
      return s;
    };
    double p = 1.0;
    try {
      p = t_star_p_value(t_star(summarize(draw(StreamPurpose::mc_draw))), n);
    } catch (const DegenerateStatistic&) {
      try {
        p = t_star_p_value(t_star(summarize(draw(StreamPurpose::mc_redraw))), n);
      } catch (const DegenerateStatistic&) {
        p = 1.0;
      }
    }
    reject[i] = p < alpha ? 1 : 0;
  });
  long long count = 0;
  for (unsigned char r : reject) count += r;
  return static_cast<double>(count) / static_cast<double>(m);
}

}  // namespace detail

/// Statistic/weight columns of each table, in publication order.
inline std::vector<std::pair<std::string, std::string>> table_statistics(
    const std::string& table_id) {
  if (table_id == "gof") {
    return {{"tstar", ""}, {"t1", "f1"}, {"t1", "f05"}};
  }
  if (table_id == "symmetry") {
    return {{"t2", "f1"}, {"t2", "f05"}, {"t3", "f1"}, {"t3", "f05"}};
  }
  throw InvalidParams("unknown table id '" + table_id +
                      "' (expected gof or symmetry)");
}

inline StudyTable run_table(const std::string& table_id,
                            const std::vector<std::size_t>& n_list,
                            long long m, double alpha, std::uint64_t seed,
                            const StudyOptions& options = {}) {
  const auto stats = table_statistics(table_id);
  if (m < 100) throw InvalidParams("study tables need M >= 100");
  StudyTable table;
  table.table_id = table_id;
  table.replications = m;
  table.alpha = alpha;
  table.seed = seed;
  table.tstar_chi2 = table_id == "gof" && options.tstar_chi2;
  const NullFamily null_family =
      table_id == "gof" ? NullFamily::bpoi : NullFamily::bpoi_symmetric;
  const auto& scenarios = registry();
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    for (std::size_t n : n_list) {
      for (std::size_t ti = 0; ti < stats.size(); ++ti) {
        const auto& [stat_id, weight_id] = stats[ti];
        const std::uint64_t cs = detail::cell_seed(seed, si, ti, n);
        StudyCell cell;
        cell.scenario = scenarios[si].id;
        cell.n = n;
        cell.statistic = stat_id;
        cell.weight = weight_id;
        if (stat_id == "tstar" && table.tstar_chi2) {
          cell.rejection_rate = detail::tstar_chi2_rejection_rate(
              scenarios[si].dist, n, m, alpha, cs);
        } else {
          BootstrapConfig cfg;
          cfg.replications = 1;  // warp-speed: one bootstrap per replication
          cfg.alpha = alpha;
          cfg.seed = cs;
          cfg.null_family = null_family;
          cell.rejection_rate = warp_speed_study(scenarios[si].dist,
                                                 scenarios[si].id, n, stat_id,
                                                 weight_id, m, cfg)
                                    .rejection_rate;
        }
        table.cells.push_back(cell);
      }
    }
  }
  return table;
}

enum class TableFormat { csv, markdown };

/// Renders a complete table; rates carry three decimals. The cell grid
/// must be rectangular and free of
/// duplicates.
inline std::string render(const StudyTable& table, TableFormat format) {
  std::set<std::string> scenarios;
  std::set<std::size_t> ns;
  std::set<std::pair<std::string, std::string>> stats;
  std::set<std::tuple<std::string, std::size_t, std::string, std::string>> keys;
  for (const StudyCell& c : table.cells) {
    scenarios.insert(c.scenario);
    ns.insert(c.n);
    stats.insert({c.statistic, c.weight});
    if (!keys.insert({c.scenario, c.n, c.statistic, c.weight}).second) {
      throw InvalidParams("duplicate study cell for " + c.scenario);
    }
  }
  if (keys.size() != scenarios.size() * ns.size() * stats.size()) {
    throw InvalidParams("incomplete study table grid");
  }
  std::string out;
  char line[256];
  if (format == TableFormat::csv) {
    out += "scenario,n,statistic,weight,rejection_rate,M,alpha,seed\n";
    for (const StudyCell& c : table.cells) {
      std::snprintf(line, sizeof(line), "%s,%zu,%s,%s,%.3f,%lld,%g,%llu\n",
                    c.scenario.c_str(), c.n, c.statistic.c_str(),
                    c.weight.c_str(), c.rejection_rate, table.replications,
                    table.alpha,
                    static_cast<unsigned long long>(table.seed));
      out += line;
    }
    return out;
  }
  out += "| scenario | n | statistic | weight | rejection_rate |\n";
  out += "|---|---|---|---|---|\n";
  for (const StudyCell& c : table.cells) {
    std::snprintf(line, sizeof(line), "| %s | %zu | %s | %s | %.3f |\n",
                  c.scenario.c_str(), c.n, c.statistic.c_str(),
                  c.weight.c_str(), c.rejection_rate);
    out += line;
  }
  return out;
}

}  // namespace bicount
