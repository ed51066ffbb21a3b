#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "caphs/error.hpp"

namespace caphs {

/// Nonnegative-denominator rational used for every tunable ratio (rho,
/// epsilon, alpha, beta, bucket base). Comparisons are exact.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw Error(ErrorKind::kParameterViolation, "zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend constexpr bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend constexpr bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend constexpr bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
};

/// Accepts "p/q", an integer, or a finite decimal such as "0.25".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorKind::kMalformedInput, "not a rational: '" + std::string(text) + "'");
  };
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) throw fail();
    std::size_t pos = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      pos = 1;
    }
    if (pos == s.size()) throw fail();
    std::int64_t v = 0;
    for (; pos < s.size(); ++pos) {
      if (s[pos] < '0' || s[pos] > '9') throw fail();
      if (v > (INT64_MAX - 9) / 10) throw fail();
      v = v * 10 + (s[pos] - '0');
    }
    return neg ? -v : v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) throw fail();
    const bool neg = !whole.empty() && whole[0] == '-';
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    const std::int64_t mag = (w < 0 ? -w : w) * scale + f;
    return Rational(neg ? -mag : mag, scale);
  }
  return Rational(parse_int(text));
}

}  // namespace caphs
