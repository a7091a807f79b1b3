#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "nedpca/errors.hpp"

namespace nedpca {

// Mask of the low n bits.
constexpr std::uint64_t site_mask(int n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

// Cyclic shift on an n-site ring: bit i of the result is bit (i + j) mod n of x.
// Bit i - 1 houses site i, so this reads "the symbol j sites ahead".
constexpr std::uint64_t ahead(std::uint64_t x, int n, int j) noexcept {
  j %= n;
  if (j == 0) return x;
  return ((x >> j) | (x << (n - j))) & site_mask(n);
}

/// Occupation state of an n-site ring, n <= 64. Site i (1-based) is bit i-1.
///
/// The text form lists sites 1..n left to right, so "011" on n = 3 has
/// sites 2 and 3 occupied and encodes to the integer 6.
class Configuration {
 public:
  static constexpr int kMaxSites = 64;

  Configuration() = default;

  Configuration(int n, std::uint64_t bits) : n_(n), bits_(bits) {
    if (n < 1 || n > kMaxSites)
      throw InvalidParams("configuration size must be in [1, 64], got " + std::to_string(n));
    if ((bits & ~site_mask(n)) != 0)
      throw InvalidParams("encoding " + std::to_string(bits) + " has bits beyond n=" +
                          std::to_string(n));
  }

  static Configuration zeros(int n) { return {n, 0}; }
  static Configuration ones(int n) { return {n, site_mask(n)}; }

  /// Parses a binary string ("0110", site 1 leftmost) or, when `n` is given and
  /// the text is not exactly n binary digits, an unsigned integer encoding.
  static Configuration parse(std::string_view text, int n = 0) {
    const bool binary = !text.empty() && text.find_first_not_of("01") == std::string_view::npos;
    if (binary && (n == 0 || static_cast<int>(text.size()) == n)) {
      const int size = static_cast<int>(text.size());
      if (size > kMaxSites) throw InvalidParams("configuration longer than 64 sites");
      std::uint64_t bits = 0;
      for (int i = 0; i < size; ++i)
        if (text[static_cast<std::size_t>(i)] == '1') bits |= std::uint64_t{1} << i;
      return {size, bits};
    }
    if (n == 0) throw InvalidParams("integer configuration '" + std::string(text) + "' needs n");
    if (text.empty() || text.find_first_not_of("0123456789") != std::string_view::npos)
      throw InvalidParams("not a configuration: '" + std::string(text) + "'");
    std::uint64_t value = 0;
    try {
      value = std::stoull(std::string(text));
    } catch (const std::exception&) {
      throw InvalidParams("configuration encoding out of range: '" + std::string(text) + "'");
    }
    return {n, value};
  }

  int size() const noexcept { return n_; }
  std::uint64_t bits() const noexcept { return bits_; }
  std::uint64_t mask() const noexcept { return site_mask(n_); }

  // 1-based; indices outside [1, n] wrap around the ring.
  bool site(long i) const noexcept { return (bits_ >> index0(i)) & 1u; }

  Configuration with_site(long i, bool value) const {
    const std::uint64_t bit = std::uint64_t{1} << index0(i);
    return {n_, value ? (bits_ | bit) : (bits_ & ~bit)};
  }

  int count_ones() const noexcept { return std::popcount(bits_); }

  /// (b_1, ..., b_n) -> (b_{1+k}, ..., b_{n+k}).
  Configuration rotated(int k = 1) const {
    const int shift = ((k % n_) + n_) % n_;
    return {n_, ahead(bits_, n_, shift)};
  }

  std::string to_string() const {
    std::string out(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i)
      if ((bits_ >> i) & 1u) out[static_cast<std::size_t>(i)] = '1';
    return out;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;

 private:
  int index0(long i) const noexcept {
    const long r = (i - 1) % n_;
    return static_cast<int>(r < 0 ? r + n_ : r);
  }

  int n_ = 1;
  std::uint64_t bits_ = 0;
};

}  // namespace nedpca
