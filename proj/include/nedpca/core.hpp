#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "nedpca/configuration.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rational.hpp"
#include "nedpca/rng.hpp"

namespace nedpca {

/// How a site updates, given the window (a_i, ..., a_{i+m-1}) of the old state.
enum class SiteWindow {
  OpenVacancy,     // 0^m: deposit with probability p1
  BlockedVacancy,  // 0^{m-1}1: stay empty with probability p2
  Forced,          // anything else: becomes 0
};

inline const char* to_string(SiteWindow w) noexcept {
  switch (w) {
    case SiteWindow::OpenVacancy: return "OpenVacancy";
    case SiteWindow::BlockedVacancy: return "BlockedVacancy";
    case SiteWindow::Forced: return "Forced";
  }
  return "?";
}

/// Cyclic pattern statistics of a configuration.
struct PatternCounts {
  int n1 = 0;               // number of 1s
  std::vector<int> n10r1;   // n10r1[r - 1] = occurrences of 1 0^r 1, r = 1..m-2
  int n0m1 = 0;             // occurrences of 0^{m-1} 1

  /// Exponent of (1 - p1) in the stationary weight.
  int gap_exponent(int m) const noexcept {
    int e = (m - 1) * n0m1;
    for (std::size_t r = 0; r < n10r1.size(); ++r) e += static_cast<int>(r + 1) * n10r1[r];
    return e;
  }

  friend bool operator==(const PatternCounts&, const PatternCounts&) = default;
};

namespace detail {

inline void require_size(const Configuration& c, int n) {
  if (c.size() != n)
    throw InvalidParams("configuration has " + std::to_string(c.size()) + " sites, expected " +
                        std::to_string(n));
}

inline void require_neighbourhood(int n, int m) {
  if (m < 2 || m > n)
    throw InvalidParams("need 2 <= m <= n, got n=" + std::to_string(n) + " m=" + std::to_string(m));
}

}  // namespace detail

/// Bit-parallel window classification: bit i of `open` (resp. `blocked`) is set
/// iff site i + 1 is an open (resp. blocked) vacancy.
struct WindowMasks {
  std::uint64_t open = 0;
  std::uint64_t blocked = 0;
  std::uint64_t all = 0;

  std::uint64_t candidates() const noexcept { return open | blocked; }
  std::uint64_t forced() const noexcept { return all & ~(open | blocked); }
};

inline WindowMasks window_masks(std::uint64_t bits, int n, int m) noexcept {
  const std::uint64_t all = site_mask(n);
  std::uint64_t empty_prefix = all & ~bits;
  for (int j = 1; j <= m - 2; ++j) empty_prefix &= ~ahead(bits, n, j);
  const std::uint64_t last = ahead(bits, n, m - 1);
  return {empty_prefix & ~last & all, empty_prefix & last, all};
}

inline WindowMasks window_masks(const Configuration& alpha, int m) {
  detail::require_neighbourhood(alpha.size(), m);
  return window_masks(alpha.bits(), alpha.size(), m);
}

inline PatternCounts count_patterns(const Configuration& beta, int m) {
  const int n = beta.size();
  detail::require_neighbourhood(n, m);
  const std::uint64_t x = beta.bits();
  PatternCounts counts;
  counts.n1 = std::popcount(x);
  counts.n10r1.assign(static_cast<std::size_t>(m - 2), 0);
  std::uint64_t run = x;  // sites i with b_i = 1 and b_{i+1..i+r} = 0
  for (int r = 1; r <= m - 2; ++r) {
    run &= ~ahead(x, n, r);
    counts.n10r1[static_cast<std::size_t>(r - 1)] = std::popcount(run & ahead(x, n, r + 1));
  }
  counts.n0m1 = std::popcount(window_masks(x, n, m).blocked);
  return counts;
}

template <class Real>
PatternCounts count_patterns(const Configuration& beta, const BasicParams<Real>& params) {
  detail::require_size(beta, params.n);
  return count_patterns(beta, params.m);
}

/// Scalar reference classification of the window starting at `site` (1-based).
inline SiteWindow classify_window(const Configuration& alpha, long site, int m) {
  detail::require_neighbourhood(alpha.size(), m);
  for (int j = 0; j < m - 1; ++j)
    if (alpha.site(site + j)) return SiteWindow::Forced;
  return alpha.site(site + m - 1) ? SiteWindow::BlockedVacancy : SiteWindow::OpenVacancy;
}

template <class Real>
SiteWindow classify_window(const Configuration& alpha, long site, const BasicParams<Real>& params) {
  detail::require_size(alpha, params.n);
  return classify_window(alpha, site, params.m);
}

/// Probability that a site with the given window takes `new_bit` next step.
template <class Real>
Real site_update_prob(SiteWindow window, bool new_bit, const BasicParams<Real>& params) {
  switch (window) {
    case SiteWindow::OpenVacancy: return new_bit ? params.p1 : Real(1 - params.p1);
    case SiteWindow::BlockedVacancy: return new_bit ? Real(1 - params.p2) : params.p2;
    case SiteWindow::Forced: return new_bit ? Real(0) : Real(1);
  }
  return Real(0);
}

/// One-step transition probability as a product of per-site factors
/// p1^a (1-p1)^b p2^c (1-p2)^d. `possible` is false when a Forced site would
/// have to become 1.
struct TransitionExponents {
  bool possible = true;
  int open_to_one = 0;
  int open_to_zero = 0;
  int blocked_to_zero = 0;
  int blocked_to_one = 0;

  friend bool operator==(const TransitionExponents&, const TransitionExponents&) = default;

  template <class Real>
  Real evaluate(const BasicParams<Real>& params) const {
    if (!possible) return Real(0);
    return ipow(Real(params.p1), static_cast<unsigned>(open_to_one)) *
           ipow(Real(1 - params.p1), static_cast<unsigned>(open_to_zero)) *
           ipow(Real(params.p2), static_cast<unsigned>(blocked_to_zero)) *
           ipow(Real(1 - params.p2), static_cast<unsigned>(blocked_to_one));
  }
};

inline TransitionExponents transition_exponents(const WindowMasks& w, std::uint64_t beta) noexcept {
  TransitionExponents e;
  e.possible = (beta & w.forced()) == 0;
  e.open_to_one = std::popcount(w.open & beta);
  e.open_to_zero = std::popcount(w.open & ~beta);
  e.blocked_to_one = std::popcount(w.blocked & beta);
  e.blocked_to_zero = std::popcount(w.blocked & ~beta);
  return e;
}

inline TransitionExponents transition_exponents(const Configuration& alpha,
                                                const Configuration& beta, int m) {
  detail::require_size(beta, alpha.size());
  return transition_exponents(window_masks(alpha, m), beta.bits());
}

// Site-by-site tally through classify_window; reference for the masked path.
inline TransitionExponents transition_exponents_scalar(const Configuration& alpha,
                                                       const Configuration& beta, int m) {
  detail::require_size(beta, alpha.size());
  TransitionExponents e;
  for (int i = 1; i <= alpha.size(); ++i) {
    const bool b = beta.site(i);
    switch (classify_window(alpha, i, m)) {
      case SiteWindow::OpenVacancy: ++(b ? e.open_to_one : e.open_to_zero); break;
      case SiteWindow::BlockedVacancy: ++(b ? e.blocked_to_one : e.blocked_to_zero); break;
      case SiteWindow::Forced:
        if (b) e.possible = false;
        break;
    }
  }
  return e;
}

/// P[alpha -> beta] = prod_i site_update_prob(classify_window(alpha, i), beta_i).
template <class Real>
Real transition_prob(const Configuration& alpha, const Configuration& beta,
                     const BasicParams<Real>& params) {
  detail::require_size(alpha, params.n);
  detail::require_size(beta, params.n);
  Real prob{1};
  for (int i = 1; i <= params.n; ++i) {
    const Real factor = site_update_prob(classify_window(alpha, i, params.m), beta.site(i), params);
    if (factor == Real(0)) return Real(0);
    prob *= factor;
  }
  return prob;
}

/// Synchronous update: every window is classified against the old state, and
/// exactly n uniforms are consumed (site order), including at Forced sites.
inline Configuration step_sample(const Configuration& alpha, const ModelParams& params,
                                 RandomStream& rng) {
  detail::require_size(alpha, params.n);
  std::vector<SiteWindow> windows(static_cast<std::size_t>(params.n));
  for (int i = 1; i <= params.n; ++i)
    windows[static_cast<std::size_t>(i - 1)] = classify_window(alpha, i, params.m);
  Configuration next = Configuration::zeros(params.n);
  for (int i = 1; i <= params.n; ++i) {
    const double u = rng.next_uniform();
    if (u < site_update_prob(windows[static_cast<std::size_t>(i - 1)], true, params))
      next = next.with_site(i, true);
  }
  return next;
}

}  // namespace nedpca
