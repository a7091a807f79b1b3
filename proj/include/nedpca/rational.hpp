#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "nedpca/errors.hpp"

namespace nedpca {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

// Square-and-multiply; ipow(0, 0) == 1.
template <class T>
T ipow(T base, unsigned exponent) {
  T result{1};
  while (exponent != 0) {
    if (exponent & 1u) result *= base;
    exponent >>= 1;
    if (exponent != 0) base *= base;
  }
  return result;
}

inline double to_double(const Rational& value) { return value.convert_to<double>(); }
inline double to_double(double value) { return value; }

// Natural log of a positive big integer without overflowing double.
inline double log_bigint(const BigInt& value) {
  if (value <= 0) return -HUGE_VAL;
  const auto bits = static_cast<long>(boost::multiprecision::msb(value)) + 1;
  if (bits <= 1000) return std::log(value.convert_to<double>());
  const long shift = bits - 64;
  const BigInt head = value >> shift;
  return std::log(head.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

// Accepts "a/b", plain integers and plain decimals ("0.125", "-3.5").
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return InvalidParams("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  auto parse_integer = [&](std::string_view digits) {
    if (digits.empty()) throw fail();
    std::size_t start = (digits.front() == '-' || digits.front() == '+') ? 1 : 0;
    if (start == digits.size()) throw fail();
    for (std::size_t i = start; i < digits.size(); ++i)
      if (digits[i] < '0' || digits[i] > '9') throw fail();
    return BigInt(std::string(digits.front() == '+' ? digits.substr(1) : digits));
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = parse_integer(text.substr(0, slash));
    const BigInt den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw fail();
    return Rational(num, den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (!whole.empty() && (whole.front() == '-' || whole.front() == '+')) whole.remove_prefix(1);
    if (whole.empty() && frac.empty()) throw fail();
    const BigInt w = whole.empty() ? BigInt(0) : parse_integer(whole);
    const BigInt f = frac.empty() ? BigInt(0) : parse_integer(frac);
    if (!frac.empty() && (frac.front() == '-' || frac.front() == '+')) throw fail();
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Rational value(w * scale + f, scale);
    return negative ? Rational(-value) : value;
  }
  return Rational(parse_integer(text));
}

inline std::string format_rational(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace nedpca
