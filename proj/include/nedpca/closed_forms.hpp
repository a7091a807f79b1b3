#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nedpca/configuration.hpp"
#include "nedpca/core.hpp"
#include "nedpca/errors.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rational.hpp"
#include "nedpca/stationary_table.hpp"

namespace nedpca {

/// Unnormalised stationary weight
///   p1^{N1} (1-p1)^{sum_r r N_{10^r1} + (m-1) N_{0^{m-1}1}} p2^{-N_{0^{m-1}1}}.
template <class Real>
Real stationary_weight(const Configuration& beta, const BasicParams<Real>& params) {
  const PatternCounts counts = count_patterns(beta, params);
  return ipow(Real(params.p1), static_cast<unsigned>(counts.n1)) *
         ipow(Real(1 - params.p1), static_cast<unsigned>(counts.gap_exponent(params.m))) /
         ipow(Real(params.p2), static_cast<unsigned>(counts.n0m1));
}

/// Default cap on 2^n-sized tables built from the closed form.
inline constexpr int kFormulaTableMaxSites = 24;

template <class Real>
StationaryTable<Real> stationary_table_formula(const BasicParams<Real>& params,
                                               int max_sites = kFormulaTableMaxSites) {
  validate(params);
  if (params.n > max_sites || params.n > Configuration::kMaxSites)
    throw BudgetExceeded("n=" + std::to_string(params.n) + " exceeds the table cap of " +
                         std::to_string(max_sites));
  const std::size_t states = std::size_t{1} << params.n;
  StationaryTable<Real> table{std::vector<Real>(states), TableSource::Formula, params};
  Real total{0};
  for (std::size_t s = 0; s < states; ++s) {
    table.probs[s] = stationary_weight(Configuration(params.n, s), params);
    total += table.probs[s];
  }
  for (auto& p : table.probs) p /= total;
  return table;
}

/// Sum of stationary weights over all 2^n configurations.
template <class Real>
Real partition_bruteforce(const BasicParams<Real>& params, int max_sites = kFormulaTableMaxSites) {
  validate(params);
  if (params.n > max_sites)
    throw BudgetExceeded("n=" + std::to_string(params.n) + " exceeds the brute-force cap of " +
                         std::to_string(max_sites));
  Real total{0};
  const std::size_t states = std::size_t{1} << params.n;
  for (std::size_t s = 0; s < states; ++s) total += stationary_weight(Configuration(params.n, s), params);
  return total;
}

// ---------------------------------------------------------------------------
// Combinatorial index sets of the partition-function triple sum.

struct IndexPair {
  int M = 0;  // zeros inside 1 0^r 1 gaps, r <= m-2
  int N = 0;  // number of 0^{m-1} 1 occurrences
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};
using IndexPairSet = std::vector<IndexPair>;

/// C_{n,k}: M in {0..n-k-m+1} u {n-k}, 0 <= N <= floor((n-k-M)/(m-1)),
/// with N = 0 exactly when M = n-k.
inline IndexPairSet enumerate_index_pairs(int n, int m, int k) {
  detail::require_neighbourhood(n, m);
  if (k < 1 || k > n) throw InvalidParams("k must lie in [1, n]");
  IndexPairSet pairs;
  const int zeros = n - k;
  for (int M = 0; M <= zeros - (m - 1); ++M)
    for (int N = 1; N <= (zeros - M) / (m - 1); ++N) pairs.push_back({M, N});
  pairs.push_back({zeros, 0});
  return pairs;
}

using Composition = std::vector<int>;
using CompositionSet = std::vector<Composition>;

/// T_M: tuples (x_1..x_{m-2}) in {0..k}^{m-2} with sum_s s x_s = M.
inline CompositionSet enumerate_compositions(int M, int k, int m) {
  if (M < 0) throw InvalidParams("M must be nonnegative");
  if (m < 2) throw InvalidParams("m must be at least 2");
  CompositionSet out;
  Composition current(static_cast<std::size_t>(m - 2), 0);
  // Fill coordinates from the largest weight down so the remainder shrinks fast.
  auto recurse = [&](auto&& self, int s, int remaining) -> void {
    if (s == 0) {
      if (remaining == 0) out.push_back(current);
      return;
    }
    for (int x = 0; x <= k && x * s <= remaining; ++x) {
      current[static_cast<std::size_t>(s - 1)] = x;
      self(self, s - 1, remaining - x * s);
    }
    current[static_cast<std::size_t>(s - 1)] = 0;
  };
  recurse(recurse, m - 2, M);
  std::sort(out.begin(), out.end());
  return out;
}

/// Binomial coefficient with binom(-1, -1) = 1, zero for b < 0 otherwise,
/// for negative a otherwise, and for b > a.
inline BigInt binomial(long a, long b) {
  if (a == -1 && b == -1) return 1;
  if (b < 0 || a < 0 || b > a) return 0;
  b = std::min(b, a - b);
  BigInt result = 1;
  for (long i = 1; i <= b; ++i) {
    result *= a - b + i;
    result /= i;
  }
  return result;
}

/// k! / prod(parts!), zero when any part is negative. Parts must sum to k.
inline BigInt multinomial(int k, std::span<const int> parts) {
  BigInt result = 1;
  int used = 0;
  for (int part : parts) {
    if (part < 0) return 0;
    used += part;
    result *= binomial(used, part);
  }
  if (used != k) throw std::logic_error("multinomial parts do not sum to k");
  return result;
}

/// One (k, M, N, x) term of the triple sum. The weight monomial is
/// p1^k (1-p1)^{M+(m-1)N} p2^{-N}.
struct WeightTerm {
  int k = 0;
  int M = 0;
  int N = 0;
  Composition x;
  BigInt density_multiplicity;  // multinomial * binomial
  BigInt multiplicity;          // n/k * density_multiplicity
  BigInt multiplicity_numerator;  // n * density_multiplicity, divisible by k

  int one_minus_p1_exponent(int m) const noexcept { return M + (m - 1) * N; }
};

inline std::vector<WeightTerm> weight_terms(int n, int m) {
  detail::require_neighbourhood(n, m);
  std::vector<WeightTerm> terms;
  for (int k = 1; k <= n; ++k) {
    for (const IndexPair& pair : enumerate_index_pairs(n, m, k)) {
      for (Composition& x : enumerate_compositions(pair.M, k, m)) {
        int x_total = 0;
        for (int v : x) x_total += v;
        std::vector<int> slots(x.begin(), x.end());
        slots.push_back(pair.N);
        slots.push_back(k - pair.N - x_total);
        WeightTerm term;
        term.k = k;
        term.M = pair.M;
        term.N = pair.N;
        term.x = std::move(x);
        if (slots.back() >= 0) {
          term.density_multiplicity =
              multinomial(k, slots) * binomial(n - k - pair.M - (m - 2) * pair.N - 1, pair.N - 1);
        }
        term.multiplicity_numerator = term.density_multiplicity * n;
        term.multiplicity = term.multiplicity_numerator / k;
        terms.push_back(std::move(term));
      }
    }
  }
  return terms;
}

namespace detail {

template <class Real>
Real sum_terms(const std::vector<WeightTerm>& terms, const BasicParams<Real>& params,
               bool rotation_factor) {
  if constexpr (is_exact_v<Real>) {
    Real total{0};
    const Real q1 = 1 - params.p1;
    for (const WeightTerm& t : terms) {
      const BigInt& mult = rotation_factor ? t.multiplicity : t.density_multiplicity;
      if (mult == 0) continue;
      total += Real(mult) * ipow(Real(params.p1), static_cast<unsigned>(t.k)) *
               ipow(q1, static_cast<unsigned>(t.one_minus_p1_exponent(params.m))) /
               ipow(Real(params.p2), static_cast<unsigned>(t.N));
    }
    return total;
  } else {
    const double lp1 = std::log(params.p1);
    const double lq1 = std::log1p(-params.p1);
    const double lp2 = std::log(params.p2);
    double total = 0.0;
    for (const WeightTerm& t : terms) {
      const BigInt& mult = rotation_factor ? t.multiplicity : t.density_multiplicity;
      if (mult == 0) continue;
      total += std::exp(log_bigint(mult) + t.k * lp1 + t.one_minus_p1_exponent(params.m) * lq1 -
                        t.N * lp2);
    }
    return total;
  }
}

}  // namespace detail

/// Closed-form partition function Z_{n,m}.
template <class Real>
Real partition_formula(const BasicParams<Real>& params) {
  validate(params);
  return Real(1) + detail::sum_terms(weight_terms(params.n, params.m), params, true);
}

/// ln Z_{n,m} by log-sum-exp over the terms; finite for rings far beyond the
/// range where Z itself overflows.
inline double log_partition_formula(const ModelParams& params) {
  validate(params);
  const double lp1 = std::log(params.p1);
  const double lq1 = std::log1p(-params.p1);
  const double lp2 = std::log(params.p2);
  std::vector<double> logs{0.0};
  for (const WeightTerm& t : weight_terms(params.n, params.m)) {
    if (t.multiplicity == 0) continue;
    logs.push_back(log_bigint(t.multiplicity) + t.k * lp1 +
                   t.one_minus_p1_exponent(params.m) * lq1 - t.N * lp2);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return top + std::log(acc);
}

/// Stationary probability that site 1 is occupied.
template <class Real>
Real density_formula(const BasicParams<Real>& params) {
  validate(params);
  const auto terms = weight_terms(params.n, params.m);
  const Real occupied = detail::sum_terms(terms, params, false);
  const Real z = Real(1) + detail::sum_terms(terms, params, true);
  return occupied / z;
}

}  // namespace nedpca
