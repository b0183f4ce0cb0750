// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace bicount {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter values outside a family's admissible region.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Structurally valid parameters for which the requested operation has no
/// implemented recipe (e.g. sampling a BNB with pi0 < 0).
class UnsupportedParams : public Error {
 public:
  using Error::Error;
};

/// Truncated-grid mass deficit above the configured tolerance.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined on the given data (zero denominator, undefined
/// correlation, too few observations).
class DegenerateStatistic : public Error {
 public:
  using Error::Error;
};

/// Malformed external input: distribution strings, CSV files.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bicount
