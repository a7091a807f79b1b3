#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nedpca/configuration.hpp"
#include "nedpca/core.hpp"
#include "nedpca/errors.hpp"
#include "nedpca/parallel.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rational.hpp"
#include "nedpca/closed_forms.hpp"
#include "nedpca/stationary_table.hpp"

namespace nedpca {

/// Largest ring the dense oracle will tabulate. A 2^n x 2^n double matrix at
/// n = 12 is 128 MiB; rational mode is far more expensive per entry.
struct SolverBudget {
  int max_sites = 12;
  int max_sites_exact = 8;
};

/// Dense row-major P[alpha -> beta] over all 2^n configurations.
template <class Real>
struct TransitionMatrix {
  std::size_t n_states = 0;
  std::vector<Real> entries;
  BasicParams<Real> params;

  const Real& operator()(std::uint64_t from, std::uint64_t to) const {
    return entries[from * n_states + to];
  }
  std::span<const Real> row(std::uint64_t from) const {
    return {entries.data() + from * n_states, n_states};
  }
};

namespace detail {

template <class Real>
void check_budget(int n, const SolverBudget& budget) {
  const int cap = is_exact_v<Real> ? budget.max_sites_exact : budget.max_sites;
  if (n > cap)
    throw BudgetExceeded("n=" + std::to_string(n) + " exceeds the solver cap of " +
                         std::to_string(cap) + (is_exact_v<Real> ? " (rational mode)" : ""));
}

// Tabulates without validating p1, p2 (tests use it to build degenerate chains).
template <class Real>
TransitionMatrix<Real> tabulate(const BasicParams<Real>& params, const SolverBudget& budget = {}) {
  require_neighbourhood(params.n, params.m);
  check_budget<Real>(params.n, budget);
  const int n = params.n;
  const std::size_t states = std::size_t{1} << n;
  TransitionMatrix<Real> matrix{states, std::vector<Real>(states * states, Real(0)), params};

  // powers[f][e] = factor_f^e for the four site factors.
  const Real factors[4] = {params.p1, Real(1 - params.p1), params.p2, Real(1 - params.p2)};
  std::vector<Real> powers[4];
  for (int f = 0; f < 4; ++f) {
    powers[f].resize(static_cast<std::size_t>(n) + 1);
    powers[f][0] = Real(1);
    for (int e = 1; e <= n; ++e)
      powers[f][static_cast<std::size_t>(e)] = powers[f][static_cast<std::size_t>(e - 1)] * factors[f];
  }

  auto fill_row = [&](std::size_t from) {
    const WindowMasks w = window_masks(from, n, params.m);
    const std::uint64_t free = w.candidates();
    Real* row = matrix.entries.data() + from * states;
    // Only subsets of the open/blocked sites are reachable.
    std::uint64_t subset = 0;
    do {
      const TransitionExponents e = transition_exponents(w, subset);
      row[subset] = powers[0][static_cast<std::size_t>(e.open_to_one)] *
                    powers[1][static_cast<std::size_t>(e.open_to_zero)] *
                    powers[2][static_cast<std::size_t>(e.blocked_to_zero)] *
                    powers[3][static_cast<std::size_t>(e.blocked_to_one)];
      subset = (subset - free) & free;
    } while (subset != 0);
  };
  if constexpr (is_exact_v<Real>) {
    for (std::size_t from = 0; from < states; ++from) fill_row(from);
  } else {
    parallel_for(states, fill_row);
  }
  return matrix;
}

}  // namespace detail

/// Exhaustive tabulation of transition_prob. Throws InvalidParams or
/// BudgetExceeded.
template <class Real>
TransitionMatrix<Real> build_matrix(const BasicParams<Real>& params, const SolverBudget& budget = {}) {
  validate(params);
  return detail::tabulate(params, budget);
}

/// Largest |row sum - 1|.
template <class Real>
double row_sum_defect(const TransitionMatrix<Real>& matrix) {
  double worst = 0.0;
  for (std::size_t a = 0; a < matrix.n_states; ++a) {
    Real sum{0};
    for (const auto& p : matrix.row(a)) sum += p;
    worst = std::max(worst, detail::abs_diff(sum, Real(1)));
  }
  return worst;
}

namespace detail {

inline std::vector<double> solve_left_fixed_vector(const TransitionMatrix<double>& matrix) {
  const auto n = static_cast<Eigen::Index>(matrix.n_states);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> P(matrix.entries.data(), n, n);
  Eigen::MatrixXd A = P.transpose();
  A.diagonal().array() -= 1.0;
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = A.partialPivLu().solve(rhs);
  if (!pi.allFinite()) throw SolveFailed("stationary solve produced non-finite values");
  return {pi.data(), pi.data() + n};
}

inline std::vector<Rational> solve_left_fixed_vector(const TransitionMatrix<Rational>& matrix) {
  const std::size_t n = matrix.n_states;
  // Augmented system [P^T - I with a row of ones | e_last].
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1, Rational(0)));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = matrix(j, i);
    a[i][i] -= 1;
  }
  for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1;
  a[n - 1][n] = 1;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw SolveFailed("stationary system is singular");
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<Rational> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
  return pi;
}

}  // namespace detail

/// Max over beta of |sum_alpha P[alpha -> beta] pi(alpha) - pi(beta)|.
template <class Real>
double balance_residual(const StationaryTable<Real>& table, const TransitionMatrix<Real>& matrix) {
  if (table.size() != matrix.n_states)
    throw DimensionMismatch("table and matrix cover different state spaces");
  const std::size_t n = matrix.n_states;
  std::vector<Real> inflow(n, Real(0));
  for (std::size_t a = 0; a < n; ++a) {
    if (table.probs[a] == Real(0)) continue;
    const auto row = matrix.row(a);
    for (std::size_t b = 0; b < n; ++b)
      if (row[b] != Real(0)) inflow[b] += row[b] * table.probs[a];
  }
  double worst = 0.0;
  for (std::size_t b = 0; b < n; ++b) worst = std::max(worst, detail::abs_diff(inflow[b], table.probs[b]));
  return worst;
}

/// Unique stationary vector by a dense direct solve of (P^T - I) pi = 0 with
/// the last equation replaced by sum(pi) = 1.
template <class Real>
StationaryTable<Real> solve_stationary(const TransitionMatrix<Real>& matrix) {
  if (matrix.n_states == 0 || matrix.entries.size() != matrix.n_states * matrix.n_states)
    throw DimensionMismatch("malformed transition matrix");
  StationaryTable<Real> table{detail::solve_left_fixed_vector(matrix), TableSource::Solver,
                              matrix.params};
  if constexpr (!is_exact_v<Real>) {
    const double residual = balance_residual(table, matrix);
    if (!(residual < 1e-8))
      throw SolveFailed("stationary solve residual " + std::to_string(residual) + " too large");
  }
  return table;
}

/// Certificate used for ergodicity: every state reaches 0^n in one step,
/// 0^n reaches every state in one step, and 0^n has a self-loop.
template <class Real>
bool check_irreducible_aperiodic(const TransitionMatrix<Real>& matrix) {
  if (matrix.n_states == 0) return false;
  for (std::size_t s = 0; s < matrix.n_states; ++s)
    if (!(matrix(s, 0) > Real(0)) || !(matrix(0, s) > Real(0))) return false;
  return true;
}

/// Worst detailed-balance violation |pi(a)P[a->b] - pi(b)P[b->a]| over all pairs.
struct BalanceAudit {
  double max_violation = 0.0;
  std::uint64_t witness_from = 0;
  std::uint64_t witness_to = 0;
  /// Pairs reachable in one direction only; any such pair breaks detailed balance.
  std::size_t one_way_pairs = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> one_way_witness;

  bool reversible(double threshold = 1e-12) const noexcept { return max_violation < threshold; }
};

template <class Real>
BalanceAudit audit_detailed_balance(const StationaryTable<Real>& table,
                                    const TransitionMatrix<Real>& matrix) {
  if (table.size() != matrix.n_states)
    throw DimensionMismatch("table and matrix cover different state spaces");
  BalanceAudit audit;
  const std::size_t n = matrix.n_states;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Real& forward = matrix(a, b);
      const Real& backward = matrix(b, a);
      const bool fwd = forward > Real(0);
      const bool bwd = backward > Real(0);
      if (fwd != bwd) {
        if (!audit.one_way_witness)
          audit.one_way_witness = fwd ? std::pair{a, b} : std::pair{b, a};
        ++audit.one_way_pairs;
      }
      if (!fwd && !bwd) continue;
      const double violation =
          detail::abs_diff(Real(table.probs[a] * forward), Real(table.probs[b] * backward));
      if (violation > audit.max_violation) {
        audit.max_violation = violation;
        audit.witness_from = a;
        audit.witness_to = b;
      }
    }
  }
  return audit;
}

/// pi(alpha)P[alpha->beta] / (pi(beta)P[beta->alpha]) for m = 2, computed
/// directly from stationary weights and from position-set counting.
struct ReversibilityRatio {
  double direct = 0.0;
  double closed_form = 0.0;
  // |Pos_{10}(alpha) & Pos_{01}(beta)| - |Pos_{01}(alpha) & Pos_{10}(beta)|
  int exponent = 0;
};

/// `iterations` steps of nu <- nu P.
template <class Real>
std::vector<Real> power_iterate(const TransitionMatrix<Real>& matrix, std::vector<Real> nu,
                                int iterations) {
  if (nu.size() != matrix.n_states) throw DimensionMismatch("initial distribution has wrong size");
  std::vector<Real> next(nu.size());
  for (int it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), Real(0));
    for (std::size_t a = 0; a < matrix.n_states; ++a) {
      if (nu[a] == Real(0)) continue;
      const auto row = matrix.row(a);
      for (std::size_t b = 0; b < matrix.n_states; ++b) next[b] += nu[a] * row[b];
    }
    nu.swap(next);
  }
  return nu;
}

inline ReversibilityRatio reversibility_ratio(const Configuration& alpha, const Configuration& beta,
                                              const ModelParams& params) {
  validate(params);
  if (params.m != 2) throw DomainError("reversibility_ratio is defined for m = 2 only");
  detail::require_size(alpha, params.n);
  detail::require_size(beta, params.n);
  const double backward = transition_prob(beta, alpha, params);
  if (!(backward > 0.0)) throw DomainError("reverse transition " + beta.to_string() + " -> " +
                                           alpha.to_string() + " is impossible");
  const double forward = transition_prob(alpha, beta, params);

  ReversibilityRatio out;
  out.direct = stationary_weight(alpha, params) * forward / (stationary_weight(beta, params) * backward);

  const int n = params.n;
  auto pos10 = [n](std::uint64_t x) { return x & ~ahead(x, n, 1) & site_mask(n); };
  auto pos01 = [n](std::uint64_t x) { return ~x & ahead(x, n, 1) & site_mask(n); };
  out.exponent = std::popcount(pos10(alpha.bits()) & pos01(beta.bits())) -
                 std::popcount(pos01(alpha.bits()) & pos10(beta.bits()));
  const double base = params.p1 * params.p2 / ((1 - params.p1) * (1 - params.p2));
  out.closed_form = std::pow(base, out.exponent);

  const bool agree = (std::isinf(out.direct) && std::isinf(out.closed_form)) ||
                     std::abs(out.direct - out.closed_form) <=
                         1e-9 * std::max(1.0, std::abs(out.closed_form));
  if (!agree)
    throw std::logic_error("reversibility ratio mismatch for " + alpha.to_string() + ", " +
                           beta.to_string());
  return out;
}

}  // namespace nedpca
