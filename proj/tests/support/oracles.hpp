#pragma once

// Test-only reference computations. Everything here works on plain strings
// of '0'/'1' (site 1 leftmost) and re-derives the model rules from scratch,
// sharing no code with the library paths it checks.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> all_configs(int n) {
  std::vector<std::string> out;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int i = 0; i < n; ++i)
      if ((code >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
    out.push_back(s);
  }
  return out;
}

inline char at(const std::string& s, long i) {  // 0-based, cyclic
  const long n = static_cast<long>(s.size());
  return s[static_cast<std::size_t>(((i % n) + n) % n)];
}

/// Cyclic occurrences of `pattern` (each start position counted once).
inline int count(const std::string& s, const std::string& pattern) {
  int hits = 0;
  for (long i = 0; i < static_cast<long>(s.size()); ++i) {
    bool match = true;
    for (long j = 0; j < static_cast<long>(pattern.size()); ++j)
      if (at(s, i + j) != pattern[static_cast<std::size_t>(j)]) {
        match = false;
        break;
      }
    hits += match;
  }
  return hits;
}

inline double weight(const std::string& s, int m, double p1, double p2) {
  int gap = 0;
  for (int r = 1; r <= m - 2; ++r) gap += r * count(s, "1" + std::string(static_cast<std::size_t>(r), '0') + "1");
  const int blocked = count(s, std::string(static_cast<std::size_t>(m - 1), '0') + "1");
  gap += (m - 1) * blocked;
  return std::pow(p1, count(s, "1")) * std::pow(1 - p1, gap) / std::pow(p2, blocked);
}

/// P[a -> b] straight from the three update rules.
inline double transition(const std::string& a, const std::string& b, int m, double p1, double p2) {
  double prob = 1.0;
  const std::string open(static_cast<std::size_t>(m), '0');
  const std::string blocked = std::string(static_cast<std::size_t>(m - 1), '0') + "1";
  for (long i = 0; i < static_cast<long>(a.size()); ++i) {
    std::string window;
    for (long j = 0; j < m; ++j) window += at(a, i + j);
    const bool one = b[static_cast<std::size_t>(i)] == '1';
    if (window == open)
      prob *= one ? p1 : 1 - p1;
    else if (window == blocked)
      prob *= one ? 1 - p2 : p2;
    else if (one)
      return 0.0;
  }
  return prob;
}

inline std::string rotate(const std::string& s, int k) {
  std::string out(s.size(), '0');
  for (long i = 0; i < static_cast<long>(s.size()); ++i) out[static_cast<std::size_t>(i)] = at(s, i + k);
  return out;
}

}  // namespace oracle
