#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dioex/core.hpp"

namespace dioex {

// coeff * sqrt(radicand) with radicand square-free; radicand 1 means rational.
struct Surd {
  Rational coeff;
  std::uint64_t radicand = 1;
  bool operator==(const Surd&) const = default;
};

class Frequency {
 public:
  enum class Kind { Sqrt, Decimal, ContinuedFraction, Liouville, Value };

  Kind kind = Kind::Value;
  std::string descriptor;
  int precision = kDefaultPrecisionBits;
  HighReal value;
  HighReal error;  // |value - true value| <= error
  double approx = 0.0;
  double approx_lo = 0.0;  // value ~ approx + approx_lo (double-double)
  std::optional<Surd> exact;
  std::vector<BigInt> quotients;  // continued-fraction input, when given

  void set_approx() {
    approx = to_double(value);
    approx_lo = to_double(value - HighReal(approx));
  }

  bool is_rational() const { return exact && exact->radicand == 1; }
  const Rational& rational() const {
    require(is_rational(), "frequency is not an exact rational");
    return exact->coeff;
  }

  static Frequency from_rational(const Rational& r, Kind kind, std::string descriptor,
                                 int precision) {
    require(r > 0, "frequency must be positive");
    Frequency f;
    f.kind = kind;
    f.descriptor = std::move(descriptor);
    f.precision = precision;
    f.value = round_to_bits(to_high(r), precision);
    f.error = boost::multiprecision::ldexp(f.value, 1 - precision);
    f.set_approx();
    f.exact = Surd{r, 1};
    return f;
  }

  // A value known only numerically; no exact form is attached.
  static Frequency from_value(const HighReal& v, int precision = kDefaultPrecisionBits) {
    require(v > 0, "frequency must be positive");
    Frequency f;
    f.kind = Kind::Value;
    f.precision = precision;
    f.value = round_to_bits(v, precision);
    f.error = boost::multiprecision::ldexp(f.value, 1 - precision);
    f.set_approx();
    f.descriptor = "value:" + std::to_string(f.approx);
    return f;
  }
};

namespace detail {

inline BigInt parse_unsigned(std::string_view s, std::string_view what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw ParseError("expected unsigned integer in " + std::string(what) + ", got '" +
                     std::string(s) + "'");
  // a leading zero would make the string octal
  const std::size_t nz = std::min(s.find_first_not_of('0'), s.size() - 1);
  return BigInt(std::string(s.substr(nz)));
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("expected unsigned integer in " + std::string(what) + ", got '" +
                     std::string(s) + "'");
  return v;
}

inline BigInt pow10(int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= 10;
  return r;
}

inline Rational parse_decimal(std::string_view s) {
  std::size_t epos = s.find_first_of("eE");
  std::string_view mant = s.substr(0, epos);
  long exp10 = 0;
  if (epos != std::string_view::npos) {
    std::string_view es = s.substr(epos + 1);
    bool neg = false;
    if (!es.empty() && (es[0] == '+' || es[0] == '-')) {
      neg = es[0] == '-';
      es.remove_prefix(1);
    }
    exp10 = static_cast<long>(parse_u64(es, "dec exponent"));
    if (exp10 > 4000) throw ParseError("dec exponent out of range");
    if (neg) exp10 = -exp10;
  }
  std::size_t dot = mant.find('.');
  std::string digits(mant.substr(0, dot));
  if (dot != std::string_view::npos) {
    std::string_view frac = mant.substr(dot + 1);
    digits += frac;
    exp10 -= static_cast<long>(frac.size());
  }
  if (digits.empty()) throw ParseError("empty dec mantissa");
  BigInt n = parse_unsigned(digits, "dec mantissa");
  Rational r(n);
  if (exp10 >= 0)
    r *= Rational(pow10(static_cast<int>(exp10)));
  else
    r /= Rational(pow10(static_cast<int>(-exp10)));
  return r;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline Rational factorial_power_inverse(const BigInt& base, int exponent) {
  BigInt den = boost::multiprecision::pow(base, static_cast<unsigned>(exponent));
  return Rational(BigInt(1), den);
}

}  // namespace detail

inline constexpr const char* kDescriptorGrammar =
    "sqrt:<positive-integer> | dec:<decimal-string> | cf:<a0,a1,...> | liouville:<base>:<depth>";

// Exact sum of base^{-k!} for k = 1..depth.
inline Rational liouville_rational(std::uint64_t base, int depth) {
  require(base >= 2, "liouville base must be >= 2");
  require(depth >= 1, "liouville depth must be >= 1");
  double bits = 0;
  long fact = 1;
  for (int k = 1; k <= depth; ++k) {
    fact *= k;
    bits = static_cast<double>(fact) * std::log2(static_cast<double>(base));
    if (bits > 65536) throw PrecisionExhausted("liouville denominator base^(depth!) too large");
  }
  Rational sum = 0;
  fact = 1;
  for (int k = 1; k <= depth; ++k) {
    fact *= k;
    sum += detail::factorial_power_inverse(BigInt(base), static_cast<int>(fact));
  }
  return sum;
}

inline Frequency parse_frequency(std::string_view text, int precision = kDefaultPrecisionBits) {
  if (precision < 16 || precision > kMaxPrecisionBits)
    throw ParseError("precision must be in [16, " + std::to_string(kMaxPrecisionBits) + "]");
  text = detail::trim(text);
  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("malformed frequency descriptor '" + std::string(text) +
                     "'; expected " + kDescriptorGrammar);
  std::string_view tag = text.substr(0, colon);
  std::string_view body = text.substr(colon + 1);
  std::string desc(text);

  if (tag == "sqrt") {
    std::uint64_t n = detail::parse_u64(body, "sqrt");
    if (n == 0 || n > (std::uint64_t{1} << 53)) throw ParseError("sqrt radicand out of range");
    auto split = square_free_split(n);
    if (split.radicand == 1)
      return Frequency::from_rational(Rational(split.square_root_part), Frequency::Kind::Sqrt,
                                      desc, precision);
    Frequency f;
    f.kind = Frequency::Kind::Sqrt;
    f.descriptor = desc;
    f.precision = precision;
    f.value = round_to_bits(boost::multiprecision::sqrt(HighReal(n)), precision);
    f.error = boost::multiprecision::ldexp(f.value, 1 - precision);
    f.set_approx();
    f.exact = Surd{Rational(split.square_root_part), split.radicand};
    return f;
  }
  if (tag == "dec") {
    Rational r = detail::parse_decimal(body);
    if (r <= 0) throw ParseError("dec value must be positive");
    return Frequency::from_rational(r, Frequency::Kind::Decimal, desc, precision);
  }
  if (tag == "cf") {
    auto parts = detail::split(body, ',');
    std::vector<BigInt> a;
    for (auto p : parts) a.push_back(detail::parse_unsigned(detail::trim(p), "cf"));
    for (std::size_t i = 1; i < a.size(); ++i)
      if (a[i] == 0) throw ParseError("cf partial quotients after the first must be >= 1");
    Rational r(a.back());
    for (std::size_t i = a.size() - 1; i-- > 0;) r = Rational(a[i]) + 1 / r;
    if (r <= 0) throw ParseError("cf value must be positive");
    Frequency f = Frequency::from_rational(r, Frequency::Kind::ContinuedFraction, desc, precision);
    f.quotients = std::move(a);
    return f;
  }
  if (tag == "liouville") {
    auto parts = detail::split(body, ':');
    if (parts.size() != 2) throw ParseError("liouville descriptor is liouville:<base>:<depth>");
    std::uint64_t base = detail::parse_u64(parts[0], "liouville base");
    std::uint64_t depth = detail::parse_u64(parts[1], "liouville depth");
    if (base < 2 || depth < 1 || depth > 12) throw ParseError("liouville base/depth out of range");
    return Frequency::from_rational(liouville_rational(base, static_cast<int>(depth)),
                                    Frequency::Kind::Liouville, desc, precision);
  }
  throw ParseError("unknown frequency descriptor '" + std::string(text) + "'; expected " +
                   kDescriptorGrammar);
}

// High-precision value of c0 + sum c_i w_i with its error bound.
struct LinearValue {
  HighReal value;
  HighReal error;
};

inline LinearValue eval_linear(std::int64_t c0, std::span<const std::int64_t> c,
                               std::span<const Frequency* const> w) {
  LinearValue out{HighReal(c0), HighReal(0)};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    out.value += HighReal(c[i]) * w[i]->value;
    out.error += HighReal(std::llabs(c[i])) * w[i]->error;
  }
  return out;
}

// Exact verdict on c0 + sum c_i w_i == 0 when every involved frequency is symbolic.
inline std::optional<bool> exact_is_zero(std::int64_t c0, std::span<const std::int64_t> c,
                                         std::span<const Frequency* const> w) {
  std::map<std::uint64_t, Rational> groups;
  if (c0 != 0) groups[1] += Rational(c0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    if (!w[i]->exact) return std::nullopt;
    groups[w[i]->exact->radicand] += Rational(c[i]) * w[i]->exact->coeff;
  }
  for (const auto& [r, coeff] : groups)
    if (coeff != 0) return false;
  return true;
}

// d x m matrix of frequencies; axis k has extended tuple (1, w_k1, ..., w_km).
class Frequencies {
 public:
  int d = 1;
  int m = 0;
  int precision = kDefaultPrecisionBits;
  std::vector<std::vector<Frequency>> omega;

  Frequencies() = default;
  Frequencies(std::vector<std::vector<Frequency>> w, int prec) : precision(prec) {
    require(!w.empty(), "at least one axis required");
    d = static_cast<int>(w.size());
    m = static_cast<int>(w[0].size());
    for (const auto& axis : w) require(static_cast<int>(axis.size()) == m, "ragged frequency matrix");
    omega = std::move(w);
  }

  // Axes separated by '|', frequencies within an axis by ';'. A single axis is
  // replicated `replicate` times.
  static Frequencies parse(std::string_view text, int replicate = 1,
                           int prec = kDefaultPrecisionBits) {
    if (replicate < 1) throw ParseError("dimension must be >= 1");
    std::vector<std::vector<Frequency>> w;
    for (auto axis : detail::split(text, '|')) {
      std::vector<Frequency> row;
      axis = detail::trim(axis);
      if (!axis.empty())
        for (auto f : detail::split(axis, ';')) row.push_back(parse_frequency(f, prec));
      w.push_back(std::move(row));
    }
    if (w.size() == 1 && replicate > 1) w.assign(static_cast<std::size_t>(replicate), w[0]);
    if (replicate > 1 && static_cast<int>(w.size()) != replicate)
      throw ParseError("axis count does not match requested dimension");
    for (const auto& row : w)
      if (row.size() != w[0].size()) throw ParseError("every axis needs the same number of frequencies");
    return Frequencies(std::move(w), prec);
  }

  int walk_dimension() const { return d * (m + 1); }

  // Extended axis tuple in double precision: (1, w_k1, ..., w_km).
  std::vector<double> extended(int k) const {
    std::vector<double> out{1.0};
    for (const auto& f : omega[static_cast<std::size_t>(k)]) out.push_back(f.approx);
    return out;
  }

  std::vector<const Frequency*> axis_ptrs(int k) const {
    std::vector<const Frequency*> out;
    for (const auto& f : omega[static_cast<std::size_t>(k)]) out.push_back(&f);
    return out;
  }

  double max_frequency() const {
    double mx = 1.0;
    for (const auto& axis : omega)
      for (const auto& f : axis) mx = std::max(mx, f.approx);
    return mx;
  }

  std::string descriptor() const {
    std::string out;
    for (std::size_t k = 0; k < omega.size(); ++k) {
      if (k) out += '|';
      for (std::size_t i = 0; i < omega[k].size(); ++i) {
        if (i) out += ';';
        out += omega[k][i].descriptor;
      }
    }
    return out;
  }

  // False when some axis has two equal entries in its extended tuple
  // (commensurate input; accepted but flagged).
  bool pairwise_distinct() const {
    for (const auto& axis : omega) {
      std::vector<const Frequency*> ext;
      Frequency one = Frequency::from_rational(Rational(1), Frequency::Kind::Decimal, "dec:1",
                                               precision);
      ext.push_back(&one);
      for (const auto& f : axis) ext.push_back(&f);
      for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t j = i + 1; j < ext.size(); ++j) {
          if (ext[i]->exact && ext[j]->exact) {
            if (*ext[i]->exact == *ext[j]->exact) return false;
          } else if (boost::multiprecision::abs(ext[i]->value - ext[j]->value) <=
                     ext[i]->error + ext[j]->error) {
            return false;
          }
        }
    }
    return true;
  }
};

}  // namespace dioex
