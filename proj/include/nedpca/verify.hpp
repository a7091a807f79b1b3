#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "nedpca/closed_forms.hpp"
#include "nedpca/core.hpp"
#include "nedpca/exact_solver.hpp"
#include "nedpca/m2_analytics.hpp"
#include "nedpca/montecarlo.hpp"
#include "nedpca/rational.hpp"

namespace nedpca::verify {

enum class Level { Quick, Full };

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Check {
  const char* id;
  const char* title;
  Outcome (*run)(Level);
};

struct Report {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline constexpr double kP1Grid[] = {0.1, 0.3, 0.5, 0.7, 0.9};
inline constexpr double kP2Grid[] = {0.2, 0.4, 0.6, 0.8, 1.0};

struct Point {
  double p1, p2;
};
inline constexpr Point kUnitLine[] = {{0.1, 0.9}, {0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}};
inline constexpr Point kOffLine[] = {{0.3, 0.5}, {0.2, 0.3}, {0.5, 0.9}, {0.7, 0.6}, {0.4, 0.4}};

inline std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

inline double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

template <class Fn>
void for_grid(int n_max, Fn&& fn) {
  for (int m = 2; m <= 5; ++m)
    for (int n = m; n <= n_max; ++n)
      for (double p1 : kP1Grid)
        for (double p2 : kP2Grid) fn(ModelParams{n, m, p1, p2});
}

/// Largest (or smallest) value of a metric and where it happened. NaN always wins.
struct Worst {
  double value = 0.0;
  std::string where = "-";
  bool largest = true;

  void offer(double v, const ModelParams& p) {
    const bool take = largest ? !(v <= value) : !(v >= value);
    if (take || where == "-") {
      value = v;
      where = fmt("n=%d m=%d p1=%g p2=%g", p.n, p.m, p.p1, p.p2);
    }
  }
};

inline Outcome formula_matches_solver(Level level) {
  const int n_max = level == Level::Full ? 10 : 8;
  Worst worst;
  for_grid(n_max, [&](const ModelParams& p) {
    const double gap = sup_norm_gap(stationary_table_formula(p), solve_stationary(build_matrix(p)));
    worst.offer(gap, p);
  });
  return {worst.value < 1e-10, fmt("n<=%d, max sup-norm gap %.3g at %s", n_max, worst.value, worst.where.c_str())};
}

inline Outcome three_site_example(Level) {
  const ExactParams p{3, 2, Rational(1, 2), Rational(1, 3)};
  // Encoding order 000, 100, 010, 110, 001, 101, 011, 111 (site 1 leftmost).
  const Rational expected[] = {Rational(2, 9),  Rational(1, 6),  Rational(1, 6),  Rational(1, 12),
                               Rational(1, 6),  Rational(1, 12), Rational(1, 12), Rational(1, 36)};
  const auto solved = solve_stationary(build_matrix(p));
  const auto formula = stationary_table_formula(p);
  bool vector_ok = true;
  for (std::size_t s = 0; s < 8; ++s) vector_ok = vector_ok && solved[s] == expected[s] && formula[s] == expected[s];

  auto factored = [](const Rational& p1, const Rational& p2) {
    return (1 + p1) * (3 * p1 - 3 * p1 * p1 + p2 - p1 * p2 + p1 * p1 * p2) / p2;
  };
  bool z_ok = partition_formula(p) == Rational(9, 2);
  const std::pair<Rational, Rational> points[] = {
      {Rational(1, 2), Rational(1, 3)}, {Rational(2, 7), Rational(5, 9)}, {Rational(1, 10), Rational(1)}};
  for (const auto& [p1, p2] : points) {
    const ExactParams q{3, 2, p1, p2};
    z_ok = z_ok && partition_formula(q) == factored(p1, p2) && partition_bruteforce(q) == factored(p1, p2);
  }
  return {vector_ok && z_ok, fmt("stationary vector %s, Z_3 factorisation %s (Z = %s)", vector_ok ? "exact" : "MISMATCH",
                                 z_ok ? "exact" : "MISMATCH", format_rational(partition_formula(p)).c_str())};
}

inline Outcome partition_matches_bruteforce(Level) {
  Worst worst;
  for_grid(10, [&](const ModelParams& p) { worst.offer(rel_gap(partition_formula(p), partition_bruteforce(p)), p); });
  return {worst.value < 1e-9, fmt("max relative gap %.3g at %s", worst.value, worst.where.c_str())};
}

inline Outcome density_matches_table(Level) {
  Worst worst;
  for_grid(10, [&](const ModelParams& p) {
    const double density = density_formula(p);
    const auto table = stationary_table_formula(p);
    double site_one = 0.0, mean_ones = 0.0;
    for (std::uint64_t s = 0; s < table.size(); ++s) {
      if (s & 1u) site_one += table[s];
      mean_ones += std::popcount(s) * table[s];
    }
    worst.offer(std::max(std::abs(density - site_one), std::abs(density - mean_ones / p.n)), p);
  });
  return {worst.value < 1e-10, fmt("max gap %.3g at %s", worst.value, worst.where.c_str())};
}

inline Outcome reversibility_m2(Level) {
  auto audit = [](const ModelParams& p) {
    return audit_detailed_balance(stationary_table_formula(p), build_matrix(p));
  };
  Worst on_line, off_line{0.0, "-", false};
  for (int n = 3; n <= 6; ++n) {
    for (const auto& [p1, p2] : kUnitLine) {
      const ModelParams p{n, 2, p1, p2};
      on_line.offer(audit(p).max_violation, p);
    }
    for (const auto& [p1, p2] : kOffLine) {
      const ModelParams p{n, 2, p1, p2};
      off_line.offer(audit(p).max_violation, p);
    }
  }
  return {on_line.value < 1e-12 && off_line.value > 1e-6,
          fmt("on p1+p2=1 max violation %.3g (%s); off the line min violation %.3g (%s)", on_line.value,
              on_line.where.c_str(), off_line.value, off_line.where.c_str())};
}

inline Outcome irreversibility_m3(Level) {
  Worst m3{0.0, "-", false};
  int failing = 0;
  std::string first_failure = "-";
  for (int n = 3; n <= 5; ++n)
    for (double p1 : kP1Grid)
      for (double p2 : kP2Grid) {
        const ModelParams p{n, 3, p1, p2};
        const auto matrix = build_matrix(p);
        const auto result = audit_detailed_balance(stationary_table_formula(p), matrix);
        m3.offer(result.max_violation, p);
        // 0^{n-2} 1 0 -> 0^{n-1} 1 is possible, the reverse is not.
        const std::uint64_t alpha = std::uint64_t{1} << (n - 2);
        const std::uint64_t beta = std::uint64_t{1} << (n - 1);
        const bool ok = result.max_violation > 1e-6 && result.one_way_witness.has_value() &&
                        matrix(alpha, beta) > 0.0 && matrix(beta, alpha) == 0.0;
        if (!ok && failing++ == 0) first_failure = fmt("n=%d p1=%g p2=%g", n, p1, p2);
      }
  return {failing == 0, fmt("min violation %.3g (%s); %d of 75 points lack violation > 1e-6 or the one-way "
                            "witness, first at %s",
                            m3.value, m3.where.c_str(), failing, first_failure.c_str())};
}

inline Outcome m2_three_routes(Level) {
  std::vector<Point> points(std::begin(kUnitLine), std::end(kUnitLine));
  for (double p1 : kP1Grid)
    for (double p2 : kP2Grid) points.push_back({p1, p2});
  Worst worst;
  for (const auto& [p1, p2] : points) {
    const auto rec = m2::z2_recurrence(50, p1, p2);
    const auto series = m2::z2_series(50, p1, p2);
    for (int n = 2; n <= 50; ++n) {
      const ModelParams p{n, 2, p1, p2};
      const double formula = partition_formula(p);
      worst.offer(std::max({rel_gap(formula, rec[n]), rel_gap(formula, series.coeffs[n]),
                            rel_gap(rec[n], series.coeffs[n])}),
                  p);
    }
  }
  return {worst.value < 1e-8, fmt("n<=50, max pairwise relative gap %.3g at %s", worst.value, worst.where.c_str())};
}

inline Outcome m2_unit_line_closed_form(Level) {
  Worst worst;
  double worst_binomial = 0.0;
  for (const auto& [p1, p2] : kUnitLine)
    for (int n = 2; n <= 50; ++n) {
      const ModelParams p{n, 2, p1, p2};
      const double z = partition_formula(p);
      worst.offer(rel_gap(z, (1 + 2 * p1) * std::pow(1 + p1, n - 1)), p);
      worst_binomial = std::max(worst_binomial, rel_gap(z, std::pow(1 + p1, n)));
    }
  return {worst.value < 1e-12,
          fmt("Z vs (1+2p1)(1+p1)^(n-1): max relative gap %.3g at %s; Z vs (1+p1)^n: max relative gap %.3g",
              worst.value, worst.where.c_str(), worst_binomial)};
}

inline Outcome free_energy_checks(Level) {
  double pole_gap = 0.0, ratio_gap = 0.0, jump = 0.0;
  for (double p1 : kP1Grid)
    for (double p2 : kP2Grid) {
      if (m2::on_unit_q2_line(p1, p2)) continue;
      const double f = m2::free_energy(p1, p2);
      pole_gap = std::max(pole_gap, std::abs(-std::log(m2::pole_data(p1, p2).x_plus) - f));
      const auto lz = m2::z2_log_recurrence(201, p1, p2);
      ratio_gap = std::max(ratio_gap, std::abs(lz[201] - lz[200] - f));
    }
  for (double p1 : kP1Grid)
    for (double eps : {1e-6, -1e-6}) {
      if (1 - p1 + eps > 1.0) continue;
      jump = std::max(jump, std::abs(m2::free_energy(p1, 1 - p1 + eps) - m2::free_energy(p1, 1 - p1)));
    }
  return {pole_gap < 1e-12 && ratio_gap < 1e-8 && jump < 1e-4,
          fmt("pole form gap %.3g; ln(Z201/Z200) gap %.3g; jump across p1+p2=1 at eps=1e-6 %.3g", pole_gap,
              ratio_gap, jump)};
}

inline Outcome density_series_check(Level) {
  Worst worst;
  for (double p1 : kP1Grid)
    for (double p2 : kP2Grid) {
      const auto d = m2::density_series(12, p1, p2);
      for (int n = 2; n <= 12; ++n) {
        const ModelParams p{n, 2, p1, p2};
        worst.offer(std::abs(d.coeffs[n] / partition_formula(p) - density_formula(p)), p);
      }
    }
  return {worst.value < 1e-9, fmt("n<=12, max gap %.3g at %s", worst.value, worst.where.c_str())};
}

inline Outcome monte_carlo_convergence(Level) {
  std::string detail;
  bool passed = true;
  const auto started = std::chrono::steady_clock::now();
  for (int m : {2, 3}) {
    SimulationPlan plan;
    plan.params = ModelParams{6, m, 0.3, 0.5};
    plan.seed = 20240601;
    plan.chains = 4;
    plan.burn_in = 10'000;
    plan.samples = 250'000;
    const auto summary = run(plan);
    const double tv = tv_distance(summary, stationary_table_formula(plan.params));
    const double exact = density_formula(plan.params);
    const double z = std::abs(summary.density_mean - exact) / summary.density_stderr;
    passed = passed && tv < 0.01 && summary.stderr_defined && z < 4.0;
    detail += fmt("m=%d: TV %.4f, density %.6f vs %.6f (%.2f se); ", m, tv, summary.density_mean, exact, z);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  passed = passed && seconds < 60.0;
  return {passed, detail + fmt("%.1f s", seconds)};
}

inline Outcome kernel_equivalence(Level level) {
  bool identical = true;
  for (int n : {8, 16, 64})
    for (int m : {2, 3}) {
      const ModelParams p{n, m, 0.3, 0.5};
      const StepKernel kernel(p);
      RandomStream a(42, 7), b(42, 7);
      Configuration scalar = Configuration::ones(n);
      std::uint64_t bits = scalar.bits();
      for (int t = 0; t < 10'000 && identical; ++t) {
        scalar = step_sample(scalar, p, a);
        bits = kernel.step(bits, b);
        identical = bits == scalar.bits();
      }
    }

  const ModelParams p{64, 2, 0.3, 0.5};
  const long steps = level == Level::Full ? 200'000 : 50'000;
  auto best_rate = [&](auto&& body) {
    double best = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      body();
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      best = std::max(best, static_cast<double>(steps) / s);
    }
    return best;
  };
  std::uint64_t sink = 0;
  const double scalar_rate = best_rate([&] {
    RandomStream rng(1);
    Configuration c = Configuration::zeros(64);
    for (long t = 0; t < steps; ++t) c = step_sample(c, p, rng);
    sink ^= c.bits();
  });
  const StepKernel kernel(p);
  const double kernel_rate = best_rate([&] {
    RandomStream rng(1);
    std::uint64_t x = 0;
    for (long t = 0; t < steps; ++t) x = kernel.step(x, rng);
    sink ^= x;
  });
  const double ratio = kernel_rate / scalar_rate;
  return {identical && ratio >= 5.0 && sink != 1,
          fmt("trajectories %s; n=64 throughput %.3g vs %.3g steps/s (x%.1f)", identical ? "identical" : "DIVERGED",
              kernel_rate, scalar_rate, ratio)};
}

}  // namespace detail

inline const std::vector<Check>& checks() {
  static const std::vector<Check> all = {
      {"1", "formula table equals solver table", detail::formula_matches_solver},
      {"2", "three-site example reproduced exactly", detail::three_site_example},
      {"3", "partition formula equals brute-force sum", detail::partition_matches_bruteforce},
      {"4", "density formula equals table marginals", detail::density_matches_table},
      {"5a", "m=2 detailed balance holds exactly on p1+p2=1", detail::reversibility_m2},
      {"5b", "m=3 detailed balance fails on the whole grid, with one-way witness", detail::irreversibility_m3},
      {"6a", "m=2 partition: formula, recurrence and series agree", detail::m2_three_routes},
      {"6b", "m=2 partition on p1+p2=1 equals (1+2p1)(1+p1)^(n-1)", detail::m2_unit_line_closed_form},
      {"7", "free energy: pole, closed form, ratio estimate, continuity", detail::free_energy_checks},
      {"8", "density series over partition equals density formula", detail::density_series_check},
      {"9", "Monte Carlo converges to the stationary law", detail::monte_carlo_convergence},
      {"10", "bit-parallel kernel equivalence and throughput", detail::kernel_equivalence},
  };
  return all;
}

inline Report run_check(const Check& check, Level level) {
  Report report{check.id, check.title, false, {}, 0.0};
  const auto started = std::chrono::steady_clock::now();
  try {
    Outcome outcome = check.run(level);
    report.passed = outcome.passed;
    report.detail = std::move(outcome.detail);
  } catch (const std::exception& e) {
    report.detail = std::string("exception: ") + e.what();
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

inline std::string format_report(const Report& r) {
  return detail::fmt("[%s] criterion %s: %s | %s | %.2f s", r.passed ? "PASS" : "FAIL", r.id.c_str(),
                     r.title.c_str(), r.detail.c_str(), r.seconds);
}

}  // namespace nedpca::verify
