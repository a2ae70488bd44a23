#pragma once

#include <stdexcept>
#include <string>

namespace fqma {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Local-linear normal equations singular even after bandwidth escalation.
struct DegenerateDesign : Error {
  using Error::Error;
};

// PACE covariance system unsolvable even with ridge regularization.
struct SingularSystem : Error {
  using Error::Error;
};

// LP solver failed to converge; these problems are always feasible and
// bounded, so this signals a numeric bug rather than bad input.
struct LpFailure : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct EmptyTestSet : Error {
  using Error::Error;
};

struct SeriesTooShort : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

struct NonPositivePrice : Error {
  using Error::Error;
};

struct InsufficientData : Error {
  using Error::Error;
};

// Violated input invariants (curve/grid construction, config values).
struct InvalidInput : Error {
  using Error::Error;
};

}  // namespace fqma
