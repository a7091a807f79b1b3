#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "nedpca/closed_forms.hpp"
#include "nedpca/m2_analytics.hpp"

namespace {

using nedpca::ModelParams;
namespace m2 = nedpca::m2;

struct Point {
  double p1, p2;
};
const Point kOffLine[] = {{0.3, 0.5}, {0.2, 0.3}, {0.5, 0.9}, {0.7, 0.6}, {0.4, 0.4}, {0.9, 0.9}, {0.1, 0.2}};

TEST(Recurrence, Seeds) {
  const auto z = m2::z2_recurrence(5, 0.3, 0.5);
  EXPECT_EQ(z[0], 2.0);
  EXPECT_DOUBLE_EQ(z[1], 1.3);
  const double p1 = 0.3, p2 = 0.5;
  EXPECT_NEAR(z[2], 1 + 2 * p1 * (1 - p1) / p2 + p1 * p1, 1e-15);
  EXPECT_NEAR(z[3], (1 + p1) * (3 * p1 - 3 * p1 * p1 + p2 - p1 * p2 + p1 * p1 * p2) / p2, 1e-14);
  EXPECT_THROW(m2::z2_recurrence(1, 0.3, 0.5), nedpca::InvalidParams);
  EXPECT_THROW(m2::z2_recurrence(5, 0.0, 0.5), nedpca::InvalidParams);
}

TEST(Recurrence, HoldsFromTheConstantTerm) {
  // The generating function gives the recurrence for Z_2 from Z_0 and Z_1 too.
  for (const auto& [p1, p2] : kOffLine) {
    const auto z = m2::z2_recurrence(4, p1, p2);
    EXPECT_NEAR(z[2], (p1 * (1 - p1 - p2) * z[0] + p2 * (1 + p1) * z[1]) / p2, 1e-14);
  }
}

TEST(Recurrence, MatchesFormula) {
  for (const auto& [p1, p2] : kOffLine) {
    const auto z = m2::z2_recurrence(12, p1, p2);
    for (int n = 2; n <= 12; ++n) {
      const double formula = nedpca::partition_formula(ModelParams{n, 2, p1, p2});
      ASSERT_NEAR(z[n] / formula, 1.0, 1e-12) << n << " " << p1 << " " << p2;
    }
  }
}

TEST(Recurrence, LogFormTracksLinearForm) {
  const auto z = m2::z2_recurrence(300, 0.3, 0.5);
  const auto lz = m2::z2_log_recurrence(3000, 0.3, 0.5);
  for (int n = 0; n <= 300; ++n) ASSERT_NEAR(lz[n], std::log(z[n]), 1e-12 * std::max(1.0, lz[n]));
  EXPECT_TRUE(std::isfinite(lz.back()));
  EXPECT_NEAR(lz[40], nedpca::log_partition_formula(ModelParams{40, 2, 0.3, 0.5}), 1e-10);
}

TEST(Recurrence, FormulaValuesSatisfyIt) {
  for (const auto& [p1, p2] : kOffLine)
    for (int n = 2; n <= 10; ++n) {
      const double z0 = nedpca::partition_formula(ModelParams{n, 2, p1, p2});
      const double z1 = nedpca::partition_formula(ModelParams{n + 1, 2, p1, p2});
      const double z2 = nedpca::partition_formula(ModelParams{n + 2, 2, p1, p2});
      ASSERT_LT(std::abs(p1 * (1 - p1 - p2) * z0 + p2 * (1 + p1) * z1 - p2 * z2) / (p2 * z2), 1e-8);
    }
}

TEST(Series, DensityRatioIsAProbability) {
  for (int i = 1; i <= 9; ++i)
    for (int j = 1; j <= 10; ++j) {
      const double p1 = 0.1 * i, p2 = 0.1 * j;
      const auto z = m2::z2_series(60, p1, p2);
      const auto d = m2::density_series(60, p1, p2);
      for (int n = 1; n <= 60; ++n) {
        const double ratio = d.coeffs[n] / z.coeffs[n];
        ASSERT_GT(ratio, 0.0);
        ASSERT_LT(ratio, 1.0);
      }
    }
}

TEST(Series, PartitionMatchesRecurrence) {
  for (const auto& [p1, p2] : kOffLine) {
    const auto series = m2::z2_series(50, p1, p2);
    EXPECT_EQ(series.kind, "partition");
    const auto z = m2::z2_recurrence(50, p1, p2);
    for (int n = 0; n <= 50; ++n) ASSERT_NEAR(series.coeffs[n] / z[n], 1.0, 1e-8) << n;
  }
}

TEST(Series, UnitLineIsGeometric) {
  const double p1 = 0.35;
  const auto series = m2::z2_series(30, p1, 1 - p1);
  for (int n = 1; n <= 30; ++n) EXPECT_NEAR(series.coeffs[n] / std::pow(1 + p1, n), 1.0, 1e-12);
  EXPECT_EQ(series.coeffs[0], 2.0);
}

TEST(Series, DensityCoefficients) {
  for (const auto& [p1, p2] : kOffLine) {
    const auto d = m2::density_series(12, p1, p2);
    EXPECT_EQ(d.kind, "density");
    EXPECT_EQ(d.coeffs[0], 0.0);
    EXPECT_NEAR(d.coeffs[1], p1, 1e-15);
    const auto z = m2::z2_recurrence(12, p1, p2);
    for (int n = 2; n <= 12; ++n)
      ASSERT_NEAR(d.coeffs[n] / z[n], nedpca::density_formula(ModelParams{n, 2, p1, p2}), 1e-12)
          << n << " " << p1 << " " << p2;
  }
}

TEST(Series, ExpansionRejectsBadInput) {
  const double num[] = {1.0};
  const double zero_den[] = {0.0, 1.0};
  EXPECT_THROW(m2::expand_rational_series(num, zero_den, 4), nedpca::DomainError);
  const double den[] = {1.0, -1.0};
  const auto c = m2::expand_rational_series(num, den, 5);
  for (double v : c) EXPECT_EQ(v, 1.0);
}

TEST(FreeEnergy, UnitLine) {
  EXPECT_NEAR(m2::free_energy(0.4, 0.6), std::log(1.4), 1e-15);
  for (double p1 : {0.1, 0.5, 0.9}) EXPECT_NEAR(m2::free_energy(p1, 1 - p1), std::log1p(p1), 1e-15);
}

TEST(FreeEnergy, EqualsLeadingPole) {
  for (const auto& [p1, p2] : kOffLine)
    EXPECT_NEAR(m2::free_energy(p1, p2), -std::log(m2::pole_data(p1, p2).x_plus), 1e-12);
}

TEST(FreeEnergy, LimitOfLogPartition) {
  for (const auto& [p1, p2] : kOffLine) {
    const auto lz = m2::z2_log_recurrence(400, p1, p2);
    const double f = m2::free_energy(p1, p2);
    EXPECT_NEAR(lz[400] / 400, f, 2e-2);
    EXPECT_NEAR(lz[201] - lz[200], f, 1e-8);
  }
}

TEST(FreeEnergy, ContinuousAcrossUnitLine) {
  for (double p1 : {0.2, 0.5, 0.8}) {
    const double on = m2::free_energy(p1, 1 - p1);
    for (double eps : {1e-6, -1e-6}) EXPECT_NEAR(m2::free_energy(p1, 1 - p1 + eps), on, 1e-5);
    EXPECT_NEAR(m2::free_energy(p1, 1 - p1 + 1e-12), on, 1e-11);
  }
}

TEST(Poles, AreRootsOfDenominator) {
  for (int i = 1; i <= 9; ++i)
    for (int j = 1; j <= 9; ++j) {
      const double p1 = 0.1 * i, p2 = 0.1 * j + 0.05;
      if (m2::on_unit_q2_line(p1, p2)) continue;
      const auto poles = m2::pole_data(p1, p2);
      auto den = [&](double x) { return p2 - p2 * x * (1 + p1) - x * x * p1 * (1 - p1 - p2); };
      EXPECT_LT(std::abs(den(poles.x_plus)), 1e-12);
      EXPECT_LT(std::abs(den(poles.x_minus)), 1e-12 * std::max(1.0, poles.x_minus * poles.x_minus));
      EXPECT_LT(std::abs(poles.x_plus), std::abs(poles.x_minus));
      EXPECT_GT(poles.x_plus, 0.0);
    }
}

TEST(Poles, DegenerateOnUnitLine) {
  EXPECT_THROW(m2::pole_data(0.3, 0.7), nedpca::DegenerateDenominator);
  EXPECT_THROW(m2::pole_data(0.3, 0.7), nedpca::DomainError);
  for (double eps : {1e-4, 1e-6, -1e-6}) EXPECT_NEAR(m2::pole_data(0.3, 0.7 + eps).x_plus, 1 / 1.3, 2 * std::abs(eps));
}

TEST(Asymptotic, ConvergesToPartition) {
  for (const auto& [p1, p2] : kOffLine) {
    const auto z = m2::z2_recurrence(50, p1, p2);
    EXPECT_LT(std::abs(m2::asymptotic_z2(50, p1, p2) / z[50] - 1), 1e-6) << p1 << " " << p2;
  }
  // |x+ / x-| is about 0.6 here, so the error is still visible at n = 40.
  const auto z = m2::z2_recurrence(40, 0.1, 0.02);
  double previous = INFINITY;
  for (int n : {10, 20, 40}) {
    const double err = std::abs(m2::asymptotic_z2(n, 0.1, 0.02) / z[n] - 1);
    EXPECT_LT(err, previous);
    previous = err;
  }
}

TEST(Asymptotic, UnitLineIsExact) {
  for (double p1 : {0.25, 0.6})
    for (int n : {1, 5, 30}) {
      const double exact = nedpca::partition_formula(ModelParams{std::max(n, 2), 2, p1, 1 - p1});
      if (n >= 2) EXPECT_NEAR(m2::asymptotic_z2(n, p1, 1 - p1) / exact, 1.0, 1e-12);
      EXPECT_DOUBLE_EQ(m2::z2_unit_q2(n, p1), std::pow(1 + p1, n));
    }
}

}  // namespace
