#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>

#if defined(__SSE2__)
#include <immintrin.h>
#endif

namespace nedpca {

#if defined(__GNUC__)
namespace detail {

// 32x32 -> 64 bit lane products; the generic vector multiply would be a full
// 64-bit multiply.
#if defined(__AVX512F__)
inline constexpr std::size_t kPhiloxLanes = 8;
using PhiloxLanes = std::uint64_t __attribute__((vector_size(64)));
inline PhiloxLanes mul_wide(PhiloxLanes a, std::uint32_t m) noexcept {
  return (PhiloxLanes)_mm512_mul_epu32((__m512i)a, _mm512_set1_epi64(m));
}
#elif defined(__AVX2__)
inline constexpr std::size_t kPhiloxLanes = 4;
using PhiloxLanes = std::uint64_t __attribute__((vector_size(32)));
inline PhiloxLanes mul_wide(PhiloxLanes a, std::uint32_t m) noexcept {
  return (PhiloxLanes)_mm256_mul_epu32((__m256i)a, _mm256_set1_epi64x(m));
}
#elif defined(__SSE2__)
inline constexpr std::size_t kPhiloxLanes = 2;
using PhiloxLanes = std::uint64_t __attribute__((vector_size(16)));
inline PhiloxLanes mul_wide(PhiloxLanes a, std::uint32_t m) noexcept {
  return (PhiloxLanes)_mm_mul_epu32((__m128i)a, _mm_set1_epi64x(m));
}
#else
inline constexpr std::size_t kPhiloxLanes = 2;
using PhiloxLanes = std::uint64_t __attribute__((vector_size(16)));
inline PhiloxLanes mul_wide(PhiloxLanes a, std::uint32_t m) noexcept { return a * m; }
#endif

}  // namespace detail
#endif

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A pure function of a 128-bit counter and a 64-bit key.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < kRounds; ++round) {
      if (round != 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t prod0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t prod1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(prod1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(prod1),
             static_cast<std::uint32_t>(prod0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(prod0)};
    }
    return ctr;
  }

  static constexpr std::size_t kBatchBlocks = 16;

  /// Blocks first..first+15 of one stream, written in draw order (4 words per
  /// block). Each counter word is held as a lane vector, one block per lane.
  static void generate_batch(std::uint64_t first, std::uint64_t stream, Key key,
                             std::uint32_t* out) noexcept {
#if defined(__GNUC__)
    constexpr std::size_t W = detail::kPhiloxLanes;
    constexpr std::size_t G = kBatchBlocks / W;
    using Lanes = detail::PhiloxLanes;
    const Lanes low = Lanes{} + 0xffffffffu;
    Lanes c0[G], c1[G], c2[G], c3[G];
    for (std::size_t g = 0; g < G; ++g) {
      for (std::size_t b = 0; b < W; ++b) {
        c0[g][b] = (first + g * W + b) & 0xffffffffu;
        c1[g][b] = (first + g * W + b) >> 32;
      }
      c2[g] = Lanes{} + (stream & 0xffffffffu);
      c3[g] = Lanes{} + (stream >> 32);
    }
    for (int round = 0; round < kRounds; ++round) {
      if (round != 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      for (std::size_t g = 0; g < G; ++g) {
        const Lanes prod0 = detail::mul_wide(c0[g], kMul0);
        const Lanes prod1 = detail::mul_wide(c2[g], kMul1);
        c0[g] = (prod1 >> 32) ^ c1[g] ^ key[0];
        c1[g] = prod1 & low;
        c2[g] = (prod0 >> 32) ^ c3[g] ^ key[1];
        c3[g] = prod0 & low;
      }
    }
    // Words (4b, 4b+1) and (4b+2, 4b+3) as little-endian 64-bit pairs.
    for (std::size_t g = 0; g < G; ++g) {
      Lanes lo_pair = c0[g] | (c1[g] << 32), hi_pair = c2[g] | (c3[g] << 32);
      std::uint64_t lo[W], hi[W];
      std::memcpy(lo, &lo_pair, sizeof lo);
      std::memcpy(hi, &hi_pair, sizeof hi);
      std::uint64_t pairs[2 * W];
      for (std::size_t b = 0; b < W; ++b) {
        pairs[2 * b] = lo[b];
        pairs[2 * b + 1] = hi[b];
      }
      std::memcpy(out + 4 * g * W, pairs, sizeof pairs);
    }
#else
    for (std::size_t b = 0; b < kBatchBlocks; ++b) {
      const std::uint64_t block = first + b;
      const Counter ctr = generate({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                                   key);
      for (std::size_t w = 0; w < 4; ++w) out[4 * b + w] = ctr[w];
    }
#endif
  }
};

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded stream of 32-bit uniforms. Draw d of stream s under seed k is word
/// d % 4 of Philox(counter = {d / 4 (64 bit), s (64 bit)}, key = k), so any
/// draw can be computed out of order and streams never share counters.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Independent child stream, e.g. one per Monte Carlo chain.
  RandomStream split(std::uint64_t child) const noexcept {
    RandomStream out(*this);
    out.stream_ = splitmix64_mix(stream_ ^ splitmix64_mix(child + 0x9E3779B97F4A7C15ull));
    out.position_ = 0;
    out.cached_block_ = kNoBlock;
    return out;
  }

  std::uint32_t next_u32() noexcept { return at(position_++); }

  /// Uniform on [0, 1) with 32-bit resolution; exact in double.
  double next_uniform() noexcept { return next_u32() * 0x1p-32; }

  /// Draw at an absolute position; does not move the stream.
  std::uint32_t at(std::uint64_t position) noexcept {
    const std::uint64_t block = position >> 2;
    if (block != cached_block_) {
      cached_ = Philox4x32::generate(counter(block), key_);
      cached_block_ = block;
    }
    return cached_[position & 3u];
  }

  /// Draws position..position+count-1 into out; does not move the stream.
  /// out must have room for count + 3 + 4 * kBatchBlocks words.
  void fill(std::uint64_t position, std::size_t count, std::uint32_t* out) const noexcept {
    const std::size_t offset = position & 3u;
    std::uint64_t block = position >> 2;
    std::uint32_t* dst = out;
    for (std::size_t produced = 0; produced < offset + count; produced += 4 * Philox4x32::kBatchBlocks) {
      Philox4x32::generate_batch(block, stream_, key_, dst);
      block += Philox4x32::kBatchBlocks;
      dst += 4 * Philox4x32::kBatchBlocks;
    }
    if (offset != 0)
      for (std::size_t i = 0; i < count; ++i) out[i] = out[i + offset];
  }

  void skip(std::uint64_t draws) noexcept { position_ += draws; }
  std::uint64_t position() const noexcept { return position_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  Philox4x32::Key key() const noexcept { return key_; }

  Philox4x32::Counter counter(std::uint64_t block) const noexcept {
    return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  }

 private:
  static constexpr std::uint64_t kNoBlock = ~std::uint64_t{0};

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::uint64_t cached_block_ = kNoBlock;
  Philox4x32::Counter cached_{};
};

}  // namespace nedpca
