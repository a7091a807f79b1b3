#pragma once

#include <string>

#include "nedpca/errors.hpp"
#include "nedpca/rational.hpp"

namespace nedpca {

/// Ring size n, neighbourhood size m, deposition probability p1 in an open
/// vacancy and blocking probability p2. `Real` is double for numerics or
/// Rational for the exact paths.
template <class Real>
struct BasicParams {
  int n = 0;
  int m = 2;
  Real p1{};
  Real p2{};
};

using ModelParams = BasicParams<double>;
using ExactParams = BasicParams<Rational>;

/// Throws InvalidParams unless 2 <= m <= n, 0 < p1 < 1 and 0 < p2 <= 1.
template <class Real>
void validate(const BasicParams<Real>& params) {
  if (params.m < 2) throw InvalidParams("m must be at least 2, got " + std::to_string(params.m));
  if (params.n < params.m)
    throw InvalidParams("need m <= n, got n=" + std::to_string(params.n) +
                        " m=" + std::to_string(params.m));
  // Negated comparisons also reject NaN.
  if (!(params.p1 > Real(0) && params.p1 < Real(1)))
    throw InvalidParams("p1 must lie in (0,1)");
  if (!(params.p2 > Real(0) && params.p2 <= Real(1)))
    throw InvalidParams("p2 must lie in (0,1]");
}

template <class Real>
BasicParams<Real> make_params(int n, int m, Real p1, Real p2) {
  BasicParams<Real> params{n, m, std::move(p1), std::move(p2)};
  validate(params);
  return params;
}

inline ModelParams to_double(const ExactParams& params) {
  return {params.n, params.m, to_double(params.p1), to_double(params.p2)};
}

}  // namespace nedpca
