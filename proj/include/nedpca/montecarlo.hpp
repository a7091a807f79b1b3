#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "nedpca/configuration.hpp"
#include "nedpca/core.hpp"
#include "nedpca/errors.hpp"
#include "nedpca/parallel.hpp"
#include "nedpca/params.hpp"
#include "nedpca/rng.hpp"
#include "nedpca/stationary_table.hpp"

namespace nedpca {

namespace detail {

/// Bit i set iff u[i] < threshold, for i < 64; u must hold 64 words.
inline std::uint64_t below_mask(const std::uint32_t* u, std::uint64_t threshold) noexcept {
  if (threshold > 0xffffffffu) return ~std::uint64_t{0};
  const auto t = static_cast<std::uint32_t>(threshold);
  std::uint64_t mask = 0;
#if defined(__AVX512F__)
  const __m512i limit = _mm512_set1_epi32(static_cast<int>(t));
  for (int k = 0; k < 4; ++k) {
    const __m512i v = _mm512_loadu_si512(u + 16 * k);
    mask |= std::uint64_t{_mm512_cmplt_epu32_mask(v, limit)} << (16 * k);
  }
#elif defined(__AVX2__)
  const __m256i bias = _mm256_set1_epi32(static_cast<int>(0x80000000u));
  const __m256i limit = _mm256_xor_si256(_mm256_set1_epi32(static_cast<int>(t)), bias);
  for (int k = 0; k < 8; ++k) {
    const __m256i v = _mm256_xor_si256(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(u + 8 * k)), bias);
    const auto bits = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpgt_epi32(limit, v))));
    mask |= std::uint64_t{bits} << (8 * k);
  }
#else
  for (int i = 0; i < 64; ++i) mask |= std::uint64_t{u[i] < t} << i;
#endif
  return mask;
}

}  // namespace detail

/// Bit-parallel synchronous update. Windows come from shifted word operations
/// and the n uniforms of a step are generated in one vectorised batch, so the
/// trajectory matches step_sample draw for draw.
class StepKernel {
 public:
  explicit StepKernel(const ModelParams& params)
      : n_(params.n),
        m_(params.m),
        open_threshold_(threshold(params.p1)),
        blocked_threshold_(threshold(1 - params.p2)) {
    validate(params);
    if (n_ > Configuration::kMaxSites) throw InvalidParams("the step kernel supports n <= 64");
  }

  std::uint64_t step(std::uint64_t bits, RandomStream& rng) const noexcept {
    const WindowMasks w = window_masks(bits, n_, m_);
    alignas(64) std::uint32_t u[kWordBuffer];
    rng.fill(rng.position(), static_cast<std::size_t>(n_), u);
    rng.skip(static_cast<std::uint64_t>(n_));
    return (w.open & detail::below_mask(u, open_threshold_)) |
           (w.blocked & detail::below_mask(u, blocked_threshold_));
  }

  Configuration step(const Configuration& alpha, RandomStream& rng) const {
    detail::require_size(alpha, n_);
    return {n_, step(alpha.bits(), rng)};
  }

  // u * 2^-32 < p  <=>  u < ceil(p * 2^32) for 32-bit u; the scaling is exact.
  static std::uint64_t threshold(double p) noexcept {
    return static_cast<std::uint64_t>(std::ceil(p * 0x1p32));
  }

 private:
  int n_;
  int m_;
  std::uint64_t open_threshold_;
  std::uint64_t blocked_threshold_;

  static constexpr std::size_t kWordBuffer = Configuration::kMaxSites + 3 + 4 * Philox4x32::kBatchBlocks;
};

/// Histogram bookkeeping is only done for rings with at most this many sites.
inline constexpr int kHistogramMaxSites = 16;
inline constexpr int kBatchCount = 32;

struct SimulationPlan {
  ModelParams params;
  std::uint64_t seed = 0;
  int chains = 1;
  long burn_in = 10'000;
  long samples = 100'000;  // recorded states per chain
  long thin = 1;           // steps between recorded states
  std::optional<Configuration> initial;  // default 0^n
  bool histogram = true;
};

inline void validate(const SimulationPlan& plan) {
  validate(plan.params);
  if (plan.params.n > Configuration::kMaxSites) throw InvalidParams("simulation supports n <= 64");
  if (plan.chains < 1) throw InvalidParams("chains must be at least 1");
  if (plan.burn_in < 0) throw InvalidParams("burn_in must be nonnegative");
  if (plan.samples < 0) throw InvalidParams("samples must be nonnegative");
  if (plan.thin < 1) throw InvalidParams("thin must be at least 1");
  if (plan.initial && plan.initial->size() != plan.params.n)
    throw InvalidParams("initial configuration has the wrong size");
}

struct EmpiricalSummary {
  std::uint64_t samples_total = 0;
  double density_mean = std::numeric_limits<double>::quiet_NaN();
  double density_stderr = std::numeric_limits<double>::quiet_NaN();
  bool stderr_defined = false;  // needs at least kBatchCount samples per chain
  /// Averages of N1/n, N_{10^r 1}/n (r = 1..m-2) and N_{0^{m-1}1}/n.
  std::vector<double> pattern_means;
  std::vector<std::uint64_t> histogram;  // empty unless enabled and n <= 16
  double steps_per_second = 0.0;         // wall-clock throughput; not reproducible
};

namespace detail {

struct ChainTally {
  std::uint64_t samples = 0;
  std::uint64_t ones = 0;
  std::vector<std::uint64_t> patterns;  // N1, N_{10^r1}..., N_{0^{m-1}1}
  std::uint64_t batch_ones[kBatchCount] = {};
  std::uint64_t batch_samples[kBatchCount] = {};
  std::vector<std::uint64_t> histogram;
};

inline ChainTally run_chain(const SimulationPlan& plan, int chain, std::ostream* trace,
                            std::size_t trace_limit) {
  const ModelParams& p = plan.params;
  const StepKernel kernel(p);
  RandomStream rng = RandomStream(plan.seed).split(static_cast<std::uint64_t>(chain));
  std::uint64_t state = plan.initial ? plan.initial->bits() : 0;

  ChainTally tally;
  tally.patterns.assign(static_cast<std::size_t>(p.m), 0);
  const bool with_histogram = plan.histogram && p.n <= kHistogramMaxSites;
  if (with_histogram) tally.histogram.assign(std::size_t{1} << p.n, 0);

  std::size_t traced = 0;
  auto advance = [&] {
    state = kernel.step(state, rng);
    if (trace && traced < trace_limit) {
      *trace << Configuration(p.n, state).to_string() << '\n';
      ++traced;
    }
  };
  for (long t = 0; t < plan.burn_in; ++t) advance();
  for (long s = 0; s < plan.samples; ++s) {
    for (long t = 0; t < plan.thin; ++t) advance();
    const PatternCounts counts = count_patterns(Configuration(p.n, state), p.m);
    const auto ones = static_cast<std::uint64_t>(counts.n1);
    const auto batch = static_cast<std::size_t>(s * kBatchCount / plan.samples);
    tally.ones += ones;
    tally.batch_ones[batch] += ones;
    ++tally.batch_samples[batch];
    tally.patterns[0] += ones;
    for (std::size_t r = 0; r < counts.n10r1.size(); ++r)
      tally.patterns[r + 1] += static_cast<std::uint64_t>(counts.n10r1[r]);
    tally.patterns.back() += static_cast<std::uint64_t>(counts.n0m1);
    if (with_histogram) ++tally.histogram[state];
  }
  tally.samples = static_cast<std::uint64_t>(plan.samples);
  return tally;
}

}  // namespace detail

/// Runs `chains` independent chains (child streams of `seed`) and reduces
/// their tallies in chain order; results do not depend on the thread count.
/// Standard errors come from batch means over kBatchCount batches per chain.
inline EmpiricalSummary run(const SimulationPlan& plan, std::ostream* trace = nullptr,
                            std::size_t trace_limit = 100'000) {
  validate(plan);
  const auto started = std::chrono::steady_clock::now();
  std::vector<detail::ChainTally> tallies(static_cast<std::size_t>(plan.chains));
  parallel_for(tallies.size(), [&](std::size_t c) {
    tallies[c] = detail::run_chain(plan, static_cast<int>(c), c == 0 ? trace : nullptr, trace_limit);
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const int n = plan.params.n;
  EmpiricalSummary summary;
  summary.pattern_means.assign(static_cast<std::size_t>(plan.params.m), 0.0);
  if (plan.histogram && n <= kHistogramMaxSites) summary.histogram.assign(std::size_t{1} << n, 0);
  std::uint64_t ones = 0;
  std::vector<std::uint64_t> patterns(summary.pattern_means.size(), 0);
  std::vector<double> batch_means;
  for (const auto& tally : tallies) {
    summary.samples_total += tally.samples;
    ones += tally.ones;
    for (std::size_t i = 0; i < patterns.size(); ++i) patterns[i] += tally.patterns[i];
    for (std::size_t s = 0; s < tally.histogram.size(); ++s) summary.histogram[s] += tally.histogram[s];
    for (int b = 0; b < kBatchCount; ++b)
      if (tally.batch_samples[b] != 0)
        batch_means.push_back(static_cast<double>(tally.batch_ones[b]) /
                              (static_cast<double>(tally.batch_samples[b]) * n));
  }
  const double total_steps =
      static_cast<double>(plan.chains) * static_cast<double>(plan.burn_in + plan.samples * plan.thin);
  summary.steps_per_second = seconds > 0 ? total_steps / seconds : 0.0;
  if (summary.samples_total == 0) return summary;

  const double denom = static_cast<double>(summary.samples_total) * n;
  summary.density_mean = static_cast<double>(ones) / denom;
  for (std::size_t i = 0; i < patterns.size(); ++i)
    summary.pattern_means[i] = static_cast<double>(patterns[i]) / denom;

  if (plan.samples >= kBatchCount) {
    const double k = static_cast<double>(batch_means.size());
    double mean = 0.0;
    for (double b : batch_means) mean += b;
    mean /= k;
    double ss = 0.0;
    for (double b : batch_means) ss += (b - mean) * (b - mean);
    summary.density_stderr = std::sqrt(ss / (k - 1.0) / k);
    summary.stderr_defined = true;
  }
  return summary;
}

/// Half the L1 distance between two probability vectors.
inline double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("distributions have different supports");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

inline std::vector<double> empirical_distribution(const EmpiricalSummary& summary) {
  std::uint64_t total = 0;
  for (auto c : summary.histogram) total += c;
  std::vector<double> out(summary.histogram.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(summary.histogram[i]) / static_cast<double>(total);
  return out;
}

inline double tv_distance(const EmpiricalSummary& summary, const StationaryTable<double>& table) {
  if (summary.histogram.empty()) throw DimensionMismatch("summary has no histogram");
  if (summary.histogram.size() != table.size())
    throw DimensionMismatch("histogram and table cover different state spaces");
  return tv_distance(empirical_distribution(summary), table.probs);
}

}  // namespace nedpca
