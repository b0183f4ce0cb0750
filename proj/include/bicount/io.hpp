// SPDX-License-Identifier: Apache-2.0
//
// CSV ingestion and emission plus the frozen JSON schemas. Pairs files carry
// the header x1,x2[,count]; grids export as x,y,prob; reports serialize with
// exactly the TestReport field names.

#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bicount/bootstrap.hpp"
#include "bicount/errors.hpp"
#include "bicount/inference.hpp"
#include "bicount/pmf_grid.hpp"
#include "bicount/sampling.hpp"
#include "bicount/study.hpp"

namespace bicount {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  for (char c : line) {
    if (c == ',') {
      out.push_back(token);
      token.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      token += c;
    }
  }
  out.push_back(token);
  return out;
}

inline long long parse_count_token(const std::string& token, std::size_t line_no) {
  if (token.empty()) {
    throw ParseError("empty field on line " + std::to_string(line_no));
  }
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(token, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid integer '" + token + "' on line " +
                     std::to_string(line_no));
  }
  if (used != token.size()) {
    throw ParseError("invalid integer '" + token + "' on line " +
                     std::to_string(line_no));
  }
  return value;
}

}  // namespace detail

/// Reads a pairs file. A third `count` column is a frequency and expands
/// logically into repeated pairs.
inline BivariateSample read_pairs_csv(std::istream& in,
                                      const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(source_name + ": empty file");
  }
  const auto header = detail::split_csv_line(line);
  bool with_count = false;
  if (header.size() == 2 && header[0] == "x1" && header[1] == "x2") {
    with_count = false;
  } else if (header.size() == 3 && header[0] == "x1" && header[1] == "x2" &&
             header[2] == "count") {
    with_count = true;
  } else {
    throw ParseError(source_name + ": expected header 'x1,x2' or 'x1,x2,count'");
  }
  BivariateSample sample;
  sample.source = source_name;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != (with_count ? 3u : 2u)) {
      throw ParseError(source_name + ": wrong field count on line " +
                       std::to_string(line_no));
    }
    const long long x1 = detail::parse_count_token(fields[0], line_no);
    const long long x2 = detail::parse_count_token(fields[1], line_no);
    if (x1 < 0 || x2 < 0) {
      throw ParseError(source_name + ": negative count on line " +
                       std::to_string(line_no));
    }
    long long reps = 1;
    if (with_count) {
      reps = detail::parse_count_token(fields[2], line_no);
      if (reps < 1) {
        throw ParseError(source_name + ": frequency must be >= 1 on line " +
                         std::to_string(line_no));
      }
    }
    for (long long k = 0; k < reps; ++k) sample.pairs.push_back({x1, x2});
  }
  if (sample.pairs.empty()) {
    throw ParseError(source_name + ": no data rows");
  }
  return sample;
}

inline void write_pairs_csv(std::ostream& out, const BivariateSample& sample) {
  out << "x1,x2\n";
  for (const PairCount& p : sample.pairs) {
    out << p.x1 << ',' << p.x2 << '\n';
  }
}

inline void write_grid_csv(std::ostream& out, const TruncatedPmfGrid& grid,
                           int k1, int k2) {
  out << "x,y,prob\n";
  char line[96];
  for (int x = 0; x <= k1; ++x) {
    for (int y = 0; y <= k2; ++y) {
      std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", x, y, grid.at(x, y));
      out << line;
    }
  }
}

inline void write_grid_csv(std::ostream& out, const TruncatedPmfGrid& grid) {
  write_grid_csv(out, grid, grid.k1(), grid.k2());
}

inline nlohmann::ordered_json to_json(const TestReport& report) {
  nlohmann::ordered_json j;
  j["statistic_id"] = report.statistic_id;
  if (report.weight_id.empty()) {
    j["weight_id"] = nullptr;
  } else {
    j["weight_id"] = report.weight_id;
  }
  j["observed"] = report.observed;
  j["p_value"] = report.p_value;
  j["method"] = report.method;
  if (report.method == "bootstrap") {
    j["B"] = report.replications;
    j["seed"] = report.seed;
  } else if (report.method == "warp-speed") {
    j["M"] = report.replications;
    j["seed"] = report.seed;
  }
  return j;
}

inline nlohmann::ordered_json to_json(const WarpSpeedRun& run) {
  nlohmann::ordered_json j;
  j["scenario"] = run.scenario;
  j["n"] = run.n;
  j["statistic"] = run.statistic;
  j["weight"] = run.weight.empty() ? nlohmann::ordered_json(nullptr)
                                   : nlohmann::ordered_json(run.weight);
  j["M"] = run.replications;
  j["alpha"] = run.alpha;
  j["seed"] = run.seed;
  j["rejection_rate"] = run.rejection_rate;
  return j;
}

}  // namespace bicount
