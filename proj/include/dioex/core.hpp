#pragma once

#include <cmath>
#include <limits>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace dioex {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Working precision for frequency arithmetic. Descriptor values are rounded to
// a configurable number of bits below this.
using HighReal = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<512, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

inline constexpr int kMaxPrecisionBits = 480;
inline constexpr int kDefaultPrecisionBits = 256;
inline constexpr const char* kSchemaVersion = "dioex/1";

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MemoryBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline HighReal round_to_bits(const HighReal& x, int bits) {
  if (x == 0) return x;
  int e = 0;
  HighReal f = boost::multiprecision::frexp(x, &e);
  HighReal scaled = boost::multiprecision::ldexp(f, bits);
  return boost::multiprecision::ldexp(boost::multiprecision::round(scaled), e - bits);
}

inline HighReal to_high(const Rational& r) {
  return HighReal(boost::multiprecision::numerator(r)) /
         HighReal(boost::multiprecision::denominator(r));
}

inline double to_double(const HighReal& x) { return x.convert_to<double>(); }

inline double to_double(const Rational& r) { return to_double(to_high(r)); }

// Largest s with s*s <= n.
inline std::uint64_t isqrt_u64(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// n = s^2 * r with r square-free.
struct SquareFreeSplit {
  std::uint64_t square_root_part;
  std::uint64_t radicand;
};

inline SquareFreeSplit square_free_split(std::uint64_t n) {
  std::uint64_t s = 1;
  std::uint64_t r = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) s *= p;
    if (e % 2) r *= p;
  }
  r *= n;
  return {s, r};
}

namespace detail {

// lgamma(x + 1) - (x ln x - x + ln(2 pi x) / 2), Stirling series for x >= 30.
inline double stirling_correction(double x) {
  const double r = 1 / x, r2 = r * r;
  return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 / 1680)));
}

}  // namespace detail

// log C(n, k) for real n >= k >= 0, free of the cancellation lgamma differences
// suffer at large n.
inline double log_binomial(double n, double k) {
  const double j = n - k;
  const double s = std::min(k, j);
  if (s < 0) return -std::numeric_limits<double>::infinity();
  if (s < 30) {
    if (n < 1e6 || s != std::floor(s)) return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(j + 1);
    double acc = 0;
    for (int i = 1; i <= static_cast<int>(s); ++i) acc += std::log((n - s + i) / i);
    return acc;
  }
  const double p = k / n;
  const double entropy = p < 0.5 ? -k * std::log(p) - j * std::log1p(-p) : -k * std::log1p(-j / n) - j * std::log(j / n);
  return entropy + 0.5 * std::log(n / (2 * M_PI * k * j)) + detail::stirling_correction(n) -
         detail::stirling_correction(k) - detail::stirling_correction(j);
}

}  // namespace dioex
