#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nedpca/closed_forms.hpp"
#include "nedpca/errors.hpp"
#include "nedpca/params.hpp"

namespace nedpca::m2 {

/// Half-width of the band around p1 + p2 = 1 treated as the q2 = 1 line.
inline constexpr double kUnitQ2Window = 1e-9;

inline void validate(double p1, double p2) {
  nedpca::validate(ModelParams{2, 2, p1, p2});
}

inline bool on_unit_q2_line(double p1, double p2) noexcept {
  return std::abs(p1 + p2 - 1.0) < kUnitQ2Window;
}

/// q2 = (1 - p1) / p2.
inline double q2(double p1, double p2) noexcept { return (1.0 - p1) / p2; }

/// Finite prefix c_0..c_K of a power series.
struct SeriesCoefficients {
  std::vector<double> coeffs;
  std::string kind;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Power-series coefficients of num(x) / den(x) to order n_max by long
/// division: c_j = (num_j - sum_{i>=1} den_i c_{j-i}) / den_0, with the inner
/// sum Kahan-compensated.
inline std::vector<double> expand_rational_series(std::span<const double> num,
                                                  std::span<const double> den, int n_max) {
  if (den.empty() || den[0] == 0.0) throw DomainError("series denominator must have den[0] != 0");
  if (n_max < 0) throw InvalidParams("n_max must be nonnegative");
  std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (std::size_t j = 0; j < c.size(); ++j) {
    double sum = j < num.size() ? num[j] : 0.0;
    double carry = 0.0;
    for (std::size_t i = 1; i < den.size() && i <= j; ++i) {
      const double y = -den[i] * c[j - i] - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    c[j] = sum / den[0];
  }
  return c;
}

/// Z_{0,2} .. Z_{n_max,2}. Z_0 = 2 and Z_1 = 1 + p1 are the generating
/// function's constants; Z_2 comes from the combinatorial formula and
/// Z_{j+2} = [p1(1-p1-p2) Z_j + p2(1+p1) Z_{j+1}] / p2 for j >= 1.
inline std::vector<double> z2_recurrence(int n_max, double p1, double p2) {
  validate(p1, p2);
  if (n_max < 2) throw InvalidParams("n_max must be at least 2");
  std::vector<double> z(static_cast<std::size_t>(n_max) + 1);
  z[0] = 2.0;
  z[1] = 1.0 + p1;
  z[2] = partition_formula(ModelParams{2, 2, p1, p2});
  const double a = p1 * (1.0 - p1 - p2) / p2;
  const double b = 1.0 + p1;
  for (std::size_t j = 3; j < z.size(); ++j) z[j] = a * z[j - 2] + b * z[j - 1];
  return z;
}

/// ln Z_{n,2} for n = 0..n_max, carrying the recurrence with periodic
/// renormalisation so large rings do not overflow.
inline std::vector<double> z2_log_recurrence(int n_max, double p1, double p2) {
  validate(p1, p2);
  if (n_max < 2) throw InvalidParams("n_max must be at least 2");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  const double z2 = partition_formula(ModelParams{2, 2, p1, p2});
  out[0] = std::log(2.0);
  out[1] = std::log1p(p1);
  out[2] = std::log(z2);
  const double a = p1 * (1.0 - p1 - p2) / p2;
  const double b = 1.0 + p1;
  double prev = 1.0 + p1;  // Z_{j-2} / e^{scale}
  double curr = z2;        // Z_{j-1} / e^{scale}
  double scale = 0.0;
  for (std::size_t j = 3; j < out.size(); ++j) {
    const double next = a * prev + b * curr;
    prev = curr;
    curr = next;
    out[j] = scale + std::log(curr);
    if (curr > 1e150) {
      prev /= curr;
      scale += std::log(curr);
      curr = 1.0;
    }
  }
  return out;
}

/// Expansion of (2 - x - p1 x) p2 / (p2 - p2 x (1 + p1) - x^2 p1 (1 - p1 - p2)).
inline SeriesCoefficients z2_series(int n_max, double p1, double p2) {
  validate(p1, p2);
  const double num[] = {2.0 * p2, -(1.0 + p1) * p2};
  const double den[] = {p2, -p2 * (1.0 + p1), -p1 * (1.0 - p1 - p2)};
  return {expand_rational_series(num, den, n_max), "partition", p1, p2};
}

/// Expansion of p1 x (1 - x + q2 x) / ((1 - x)(1 - p1 x) - p1 q2 x^2), whose
/// n-th coefficient is Z_{n,2} times the site-occupation probability.
inline SeriesCoefficients density_series(int n_max, double p1, double p2) {
  validate(p1, p2);
  const double q = q2(p1, p2);
  const double num[] = {0.0, p1, p1 * (q - 1.0)};
  const double den[] = {1.0, -(1.0 + p1), p1 * (1.0 - q)};
  return {expand_rational_series(num, den, n_max), "density", p1, p2};
}

/// Roots of the partition generating-function denominator.
struct PoleData {
  double x_plus = 0.0;
  double x_minus = 0.0;
  double q2 = 0.0;
};

/// x_pm = (-(1+p1) pm sqrt((1-p1)^2 + 4 p1 q2)) / (2 p1 (q2 - 1)). x_plus is
/// evaluated in its rationalised form 2 / ((1+p1) + sqrt(...)), which has no
/// cancellation near q2 = 1.
inline PoleData pole_data(double p1, double p2) {
  validate(p1, p2);
  if (on_unit_q2_line(p1, p2))
    throw DegenerateDenominator("p1 + p2 = 1: the denominator is linear");
  const double q = q2(p1, p2);
  const double root = std::sqrt((1.0 - p1) * (1.0 - p1) + 4.0 * p1 * q);
  return {2.0 / ((1.0 + p1) + root), (-(1.0 + p1) - root) / (2.0 * p1 * (q - 1.0)), q};
}

/// F(2, p1, p2) = lim ln(Z_{n,2}) / n.
inline double free_energy(double p1, double p2) {
  validate(p1, p2);
  if (on_unit_q2_line(p1, p2)) return std::log1p(p1);
  const double radicand = p2 * (1.0 - p1) * (4.0 * p1 + p2 - p1 * p2);
  if (radicand < 0.0) throw DomainError("negative radicand in the free energy");
  // (-p2(1+p1) + sqrt(R)) / (2 p1 (1-p1-p2)), rationalised.
  const double x = 2.0 * p2 / (std::sqrt(radicand) + p2 * (1.0 + p1));
  return -std::log(x);
}

/// Z_{n,2} on the line q2 = 1, where every weight reduces to p1^{N1}.
inline double z2_unit_q2(int n, double p1) { return std::pow(1.0 + p1, n); }

/// Leading-pole asymptotic Z_0(x+) / (x+ (x- - x+)) x+^{-n}, with
/// Z_0(x) = (x + p1 x - 2) / (p1 (q2 - 1)). On q2 = 1 the exact value is returned.
inline double asymptotic_z2(int n, double p1, double p2) {
  validate(p1, p2);
  if (on_unit_q2_line(p1, p2)) return z2_unit_q2(n, p1);
  const PoleData poles = pole_data(p1, p2);
  const double xp = poles.x_plus;
  const double z0 = (xp + p1 * xp - 2.0) / (p1 * (poles.q2 - 1.0));
  return z0 / (xp * (poles.x_minus - xp)) * std::pow(xp, -n);
}

}  // namespace nedpca::m2
