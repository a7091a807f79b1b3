#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nedpca/core.hpp"
#include "nedpca/exact_solver.hpp"
#include "oracles.hpp"

namespace {

using nedpca::Configuration;
using nedpca::ModelParams;
using nedpca::SiteWindow;

Configuration cfg(const char* text) { return Configuration::parse(text); }

TEST(Configuration, TextFormListsSiteOneFirst) {
  const Configuration c = cfg("011");
  EXPECT_EQ(c.size(), 3);
  EXPECT_EQ(c.bits(), 6u);
  EXPECT_FALSE(c.site(1));
  EXPECT_TRUE(c.site(2));
  EXPECT_TRUE(c.site(3));
  EXPECT_FALSE(c.site(4));  // wraps to site 1
  EXPECT_EQ(c.to_string(), "011");
  EXPECT_EQ(Configuration::parse("6", 3), c);
  EXPECT_EQ(Configuration::parse("011", 3), c);
}

TEST(Configuration, RejectsBadInput) {
  EXPECT_THROW(Configuration(3, 8), nedpca::InvalidParams);
  EXPECT_THROW(Configuration(0, 0), nedpca::InvalidParams);
  EXPECT_THROW(Configuration::parse("12"), nedpca::InvalidParams);
  EXPECT_THROW(Configuration::parse("9", 3), nedpca::InvalidParams);
  EXPECT_THROW(Configuration::parse("abc", 3), nedpca::InvalidParams);
}

TEST(Configuration, RotationShiftsSitesLeft) {
  EXPECT_EQ(cfg("10010").rotated(1).to_string(), "00101");
  EXPECT_EQ(cfg("10010").rotated(-1).to_string(), "01001");
  EXPECT_EQ(cfg("10010").rotated(5), cfg("10010"));
  EXPECT_EQ(Configuration::ones(64).rotated(17), Configuration::ones(64));
}

TEST(Params, Validation) {
  EXPECT_NO_THROW(nedpca::validate(ModelParams{3, 2, 0.5, 1.0}));
  EXPECT_THROW(nedpca::validate(ModelParams{3, 1, 0.5, 0.5}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{2, 3, 0.5, 0.5}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{3, 2, 0.0, 0.5}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{3, 2, 1.0, 0.5}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{3, 2, 0.5, 0.0}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{3, 2, 0.5, 1.5}), nedpca::InvalidParams);
  EXPECT_THROW(nedpca::validate(ModelParams{3, 2, std::nan(""), 0.5}), nedpca::InvalidParams);
}

TEST(CountPatterns, AllZero) {
  for (int m = 2; m <= 6; ++m) {
    const auto counts = nedpca::count_patterns(Configuration::zeros(6), m);
    EXPECT_EQ(counts.n1, 0);
    EXPECT_EQ(counts.n0m1, 0);
    EXPECT_EQ(counts.n10r1, std::vector<int>(static_cast<std::size_t>(m - 2), 0));
  }
}

TEST(CountPatterns, ThreeSiteExample) {
  const auto counts = nedpca::count_patterns(cfg("011"), 2);
  EXPECT_EQ(counts.n1, 2);
  EXPECT_EQ(counts.n0m1, 1);
  EXPECT_TRUE(counts.n10r1.empty());
}

TEST(CountPatterns, WrappingWindow) {
  // Windows of 10010 (m = 3): 100, 001, 010, 101 (wraps), 010.
  const auto counts = nedpca::count_patterns(cfg("10010"), 3);
  EXPECT_EQ(counts.n1, 2);
  EXPECT_EQ(counts.n10r1, std::vector<int>{1});
  EXPECT_EQ(counts.n0m1, 1);
  EXPECT_EQ(counts.gap_exponent(3), 3);
}

TEST(CountPatterns, RejectsSizeMismatch) {
  EXPECT_THROW(nedpca::count_patterns(cfg("0110"), ModelParams{5, 2, 0.5, 0.5}),
               nedpca::InvalidParams);
}

TEST(CountPatterns, MatchesStringOracleAndSitesBound) {
  for (int n = 2; n <= 9; ++n) {
    for (int m = 2; m <= n; ++m) {
      for (const auto& s : oracle::all_configs(n)) {
        const auto counts = nedpca::count_patterns(cfg(s.c_str()), m);
        ASSERT_EQ(counts.n1, oracle::count(s, "1"));
        ASSERT_EQ(counts.n0m1, oracle::count(s, std::string(static_cast<std::size_t>(m - 1), '0') + "1"));
        int used = counts.n1 + (m - 1) * counts.n0m1;
        for (int r = 1; r <= m - 2; ++r) {
          const int expected = oracle::count(s, "1" + std::string(static_cast<std::size_t>(r), '0') + "1");
          ASSERT_EQ(counts.n10r1[static_cast<std::size_t>(r - 1)], expected) << s << " r=" << r;
          used += r * expected;
        }
        ASSERT_LE(used, n);
      }
    }
  }
}

TEST(CountPatterns, RotationInvariant) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 63);
    const int m = 2 + static_cast<int>(gen() % static_cast<unsigned>(n - 1));
    const Configuration c(n, gen() & nedpca::site_mask(n));
    const auto base = nedpca::count_patterns(c, m);
    for (int k : {1, 2, n / 2, n - 1}) ASSERT_EQ(nedpca::count_patterns(c.rotated(k), m), base);
  }
}

TEST(ClassifyWindow, Examples) {
  EXPECT_EQ(nedpca::classify_window(cfg("000"), 1, 2), SiteWindow::OpenVacancy);
  EXPECT_EQ(nedpca::classify_window(cfg("001"), 2, 2), SiteWindow::BlockedVacancy);
  EXPECT_EQ(nedpca::classify_window(cfg("011"), 3, 2), SiteWindow::Forced);
}

TEST(ClassifyWindow, MasksAgreeWithScan) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 63);
    const int m = 2 + static_cast<int>(gen() % static_cast<unsigned>(n - 1));
    const Configuration c(n, gen() & gen() & nedpca::site_mask(n));
    const auto masks = nedpca::window_masks(c, m);
    for (int i = 1; i <= n; ++i) {
      const auto w = nedpca::classify_window(c, i, m);
      ASSERT_EQ((masks.open >> (i - 1)) & 1u, w == SiteWindow::OpenVacancy);
      ASSERT_EQ((masks.blocked >> (i - 1)) & 1u, w == SiteWindow::BlockedVacancy);
    }
  }
}

TEST(SiteUpdateProb, Rules) {
  const ModelParams p{3, 2, 0.3, 0.7};
  EXPECT_DOUBLE_EQ(nedpca::site_update_prob(SiteWindow::OpenVacancy, true, p), 0.3);
  EXPECT_DOUBLE_EQ(nedpca::site_update_prob(SiteWindow::OpenVacancy, false, p), 0.7);
  EXPECT_DOUBLE_EQ(nedpca::site_update_prob(SiteWindow::BlockedVacancy, false, p), 0.7);
  EXPECT_DOUBLE_EQ(nedpca::site_update_prob(SiteWindow::BlockedVacancy, true, p), 1 - 0.7);
  EXPECT_EQ(nedpca::site_update_prob(SiteWindow::Forced, true, p), 0.0);
  EXPECT_EQ(nedpca::site_update_prob(SiteWindow::Forced, false, p), 1.0);
}

TEST(TransitionProb, Examples) {
  const double p1 = 0.3, p2 = 0.45;
  for (int n = 2; n <= 9; ++n) {
    const ModelParams p{n, 2, p1, p2};
    EXPECT_NEAR(nedpca::transition_prob(Configuration::zeros(n), Configuration::zeros(n), p),
                std::pow(1 - p1, n), 1e-15);
  }
  EXPECT_DOUBLE_EQ(nedpca::transition_prob(cfg("011"), cfg("100"), ModelParams{3, 2, p1, p2}), 1 - p2);
  EXPECT_EQ(nedpca::transition_prob(cfg("11"), cfg("11"), ModelParams{2, 2, p1, p2}), 0.0);
  EXPECT_DOUBLE_EQ(nedpca::transition_prob(cfg("000"), cfg("100"), ModelParams{3, 2, p1, p2}),
                   p1 * (1 - p1) * (1 - p1));
}

TEST(TransitionProb, MatchesRuleOracle) {
  for (int n = 2; n <= 6; ++n) {
    for (int m = 2; m <= n; ++m) {
      const ModelParams p{n, m, 0.35, 0.6};
      const auto configs = oracle::all_configs(n);
      for (const auto& a : configs)
        for (const auto& b : configs)
          ASSERT_NEAR(nedpca::transition_prob(cfg(a.c_str()), cfg(b.c_str()), p),
                      oracle::transition(a, b, m, p.p1, p.p2), 1e-15)
              << a << " -> " << b << " m=" << m;
    }
  }
}

TEST(TransitionProb, RowsSumToOneScalar) {
  for (int n = 2; n <= 8; ++n) {
    for (int m = 2; m <= n; ++m) {
      const ModelParams p{n, m, 0.27, 0.81};
      for (std::uint64_t a = 0; a < (1u << n); ++a) {
        double sum = 0.0;
        for (std::uint64_t b = 0; b < (1u << n); ++b)
          sum += nedpca::transition_prob(Configuration(n, a), Configuration(n, b), p);
        ASSERT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(TransitionProb, RowsSumToOneUpToTwelveSites) {
  for (int n = 9; n <= 12; ++n) {
    for (int m : {2, 3, n}) {
      const auto matrix = nedpca::build_matrix(ModelParams{n, m, 0.27, 0.81});
      EXPECT_LT(nedpca::row_sum_defect(matrix), 1e-12) << "n=" << n << " m=" << m;
    }
  }
}

TEST(TransitionProb, OnlyEmptyRunsCanDeposit) {
  for (int n = 3; n <= 7; ++n) {
    for (int m = 2; m <= n; ++m) {
      const ModelParams p{n, m, 0.5, 0.5};
      for (std::uint64_t a = 0; a < (1u << n); ++a) {
        const Configuration alpha(n, a);
        for (std::uint64_t b = 0; b < (1u << n); ++b) {
          const Configuration beta(n, b);
          if (nedpca::transition_prob(alpha, beta, p) == 0.0) continue;
          for (int j = 1; j <= n; ++j) {
            if (!beta.site(j)) continue;
            for (int i = j; i <= j + m - 2; ++i) ASSERT_FALSE(alpha.site(i));
          }
        }
      }
    }
  }
}

TEST(TransitionProb, NeighbourhoodTwoReachability) {
  for (int n = 2; n <= 8; ++n) {
    const ModelParams p{n, 2, 0.4, 0.3};
    for (std::uint64_t a = 0; a < (1u << n); ++a)
      for (std::uint64_t b = 0; b < (1u << n); ++b)
        ASSERT_EQ(nedpca::transition_prob(Configuration(n, a), Configuration(n, b), p) > 0.0, (a & b) == 0);
  }
}

TEST(TransitionProb, RotationEquivariant) {
  for (int n = 3; n <= 7; ++n) {
    for (int m = 2; m <= n; ++m) {
      const ModelParams p{n, m, 0.2, 0.9};
      for (std::uint64_t a = 0; a < (1u << n); ++a)
        for (std::uint64_t b = 0; b < (1u << n); ++b) {
          const Configuration alpha(n, a), beta(n, b);
          const double base = nedpca::transition_prob(alpha, beta, p);
          for (int k = 1; k < n; ++k)
            ASSERT_NEAR(nedpca::transition_prob(alpha.rotated(k), beta.rotated(k), p), base, 1e-15);
        }
    }
  }
}

TEST(TransitionProb, MaskedExponentsMatchSiteBySite) {
  for (int n = 2; n <= 7; ++n)
    for (int m = 2; m <= n; ++m)
      for (std::uint64_t a = 0; a < (1u << n); ++a)
        for (std::uint64_t b = 0; b < (1u << n); ++b) {
          const Configuration alpha(n, a), beta(n, b);
          ASSERT_EQ(nedpca::transition_exponents(alpha, beta, m),
                    nedpca::transition_exponents_scalar(alpha, beta, m));
        }
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20000; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 63);
    const int m = 2 + static_cast<int>(gen() % static_cast<unsigned>(n - 1));
    const Configuration alpha(n, gen() & gen() & nedpca::site_mask(n));
    const Configuration beta(n, gen() & gen() & gen() & nedpca::site_mask(n));
    ASSERT_EQ(nedpca::transition_exponents(alpha, beta, m),
              nedpca::transition_exponents_scalar(alpha, beta, m));
  }
}

TEST(StepSample, FullRingEvaporates) {
  const ModelParams p{7, 3, 0.6, 0.2};
  nedpca::RandomStream rng(42);
  for (int t = 0; t < 100; ++t)
    EXPECT_EQ(nedpca::step_sample(Configuration::ones(7), p, rng), Configuration::zeros(7));
  EXPECT_EQ(rng.position(), 700u);
}

TEST(StepSample, TinyDepositionKeepsRingEmpty) {
  const ModelParams p{10, 2, 1e-9, 0.5};
  nedpca::RandomStream rng(5);
  int stayed = 0;
  for (int t = 0; t < 10000; ++t) stayed += nedpca::step_sample(Configuration::zeros(10), p, rng) == Configuration::zeros(10);
  EXPECT_EQ(stayed, 10000);
}

TEST(StepSample, EmpiricalFrequencyMatchesTransitionProb) {
  const ModelParams p{3, 2, 0.3, 0.5};
  const Configuration from = Configuration::zeros(3);
  const Configuration to = cfg("100");
  const double expected = nedpca::transition_prob(from, to, p);
  ASSERT_NEAR(expected, 0.3 * 0.7 * 0.7, 1e-15);
  nedpca::RandomStream rng(20240611);
  const int draws = 1'000'000;
  int hits = 0;
  for (int t = 0; t < draws; ++t) hits += nedpca::step_sample(from, p, rng) == to;
  const double freq = static_cast<double>(hits) / draws;
  const double se = std::sqrt(expected * (1 - expected) / draws);
  EXPECT_LT(std::abs(freq - expected), 4 * se);
}

}  // namespace
