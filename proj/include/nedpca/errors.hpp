#pragma once

#include <stdexcept>

namespace nedpca {

// Parameter or input validation failure (CLI exit code 2).
struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested state space is larger than the configured cap (CLI exit code 3).
struct BudgetExceeded : std::length_error {
  using std::length_error::length_error;
};

struct SolveFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// The m = 2 generating-function denominator is linear on p1 + p2 = 1.
struct DegenerateDenominator : DomainError {
  using DomainError::DomainError;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace nedpca
