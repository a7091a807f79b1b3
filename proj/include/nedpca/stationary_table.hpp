#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nedpca/errors.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rational.hpp"

namespace nedpca {

enum class TableSource { Solver, Formula };

inline const char* to_string(TableSource s) noexcept {
  return s == TableSource::Solver ? "solver" : "formula";
}

/// Probability of every configuration, indexed by integer encoding.
template <class Real>
struct StationaryTable {
  std::vector<Real> probs;
  TableSource source = TableSource::Formula;
  BasicParams<Real> params;

  std::size_t size() const noexcept { return probs.size(); }
  const Real& operator[](std::uint64_t encoding) const { return probs[encoding]; }
};

namespace detail {

template <class Real>
double abs_diff(const Real& a, const Real& b) {
  if constexpr (is_exact_v<Real>) {
    return to_double(Rational(abs(Rational(a - b))));
  } else {
    return std::abs(a - b);
  }
}

}  // namespace detail

template <class Real>
double sup_norm_gap(const StationaryTable<Real>& a, const StationaryTable<Real>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("tables have different sizes");
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, detail::abs_diff(a.probs[i], b.probs[i]));
  return gap;
}

inline StationaryTable<double> to_double(const StationaryTable<Rational>& table) {
  StationaryTable<double> out{{}, table.source, to_double(table.params)};
  out.probs.reserve(table.size());
  for (const auto& p : table.probs) out.probs.push_back(to_double(p));
  return out;
}

}  // namespace nedpca
