#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dioex/walk/lattice.hpp"

namespace dioex {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log P(simple +-1 walk of k steps ends at q)
inline double log_p1(double k, double q) {
  const double aq = std::abs(q);
  if (k < aq) return kNegInf;
  const double up = (k + aq) / 2, down = (k - aq) / 2;
  if (down < 30) return log_binomial(k, up) - k * std::log(2.0);
  // entropy form relative to the fair coin; no k log 2 cancellation
  const double x = aq / k;
  return -up * std::log1p(x) - down * std::log1p(-x) + 0.5 * std::log(k / (2 * M_PI * up * down)) +
         stirling_correction(k) - stirling_correction(up) - stirling_correction(down);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// log of theta^k b(k, q) / k! for k = 0..n, -inf where unreachable.
inline std::vector<double> axis_log_terms(double theta, std::int64_t q, int n) {
  std::vector<double> out(static_cast<std::size_t>(n + 1), kNegInf);
  const std::int64_t aq = q < 0 ? -q : q;
  for (std::int64_t k = aq; k <= n; k += 2)
    out[static_cast<std::size_t>(k)] =
        static_cast<double>(k) * std::log(theta) + log_p1(static_cast<double>(k), static_cast<double>(aq)) -
        std::lgamma(static_cast<double>(k) + 1);
  return out;
}

inline std::vector<double> log_convolve(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n + 1), kNegInf);
  for (int s = 0; s <= n; ++s) {
    double mx = kNegInf;
    for (int i = 0; i <= s; ++i)
      mx = std::max(mx, a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(s - i)]);
    if (mx == kNegInf) continue;
    double acc = 0;
    for (int i = 0; i <= s; ++i) {
      const double t = a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(s - i)];
      if (t != kNegInf) acc += std::exp(t - mx);
    }
    out[static_cast<std::size_t>(s)] = mx + std::log(acc);
  }
  return out;
}

}  // namespace detail

// log P(S_n = (a, b)) for the planar walk with equal weights, via the rotation
// u = a + b, v = a - b into two independent +-1 walks.
inline double log_point_probability_planar(double n, double a, double b) {
  const double u = a + b, v = a - b;
  if (std::fmod(std::abs(u) + n, 2.0) != 0) return detail::kNegInf;
  return detail::log_p1(n, u) + detail::log_p1(n, v);
}

// P(S_n = q) for n = 0..nMax via composition sums over step counts per coordinate.
inline std::vector<double> point_probability_series(const WalkConfig& cfg, const LatticePoint& q, int nMax) {
  cfg.validate();
  const int M = cfg.M();
  std::vector<double> out(static_cast<std::size_t>(nMax + 1), 0.0);
  const int par = point_parity(q, M);
  if (M == 2 && cfg.theta[0] == cfg.theta[1]) {
    for (int n = 0; n <= nMax; ++n)
      if (n % 2 == par) out[static_cast<std::size_t>(n)] = std::exp(log_point_probability_planar(n, q[0], q[1]));
    return out;
  }
  std::vector<double> acc = detail::axis_log_terms(cfg.theta[0], q[0], nMax);
  for (int j = 1; j < M; ++j)
    acc = detail::log_convolve(acc, detail::axis_log_terms(cfg.theta[static_cast<std::size_t>(j)],
                                                           q[static_cast<std::size_t>(j)], nMax),
                               nMax);
  for (int n = 0; n <= nMax; ++n) {
    const double l = acc[static_cast<std::size_t>(n)];
    if (l != detail::kNegInf) out[static_cast<std::size_t>(n)] = std::exp(l + std::lgamma(n + 1.0));
  }
  return out;
}

// P(S_n = q) without building the distribution; 0 on parity mismatch or |q|_1 > n.
inline double point_probability(const WalkConfig& cfg, int n, const LatticePoint& q) {
  require(n >= 0, "n must be nonnegative");
  const int M = cfg.M();
  if (point_parity(q, M) != n % 2 || l1_norm(q, M) > n) return 0.0;
  if (M == 2 && cfg.theta[0] == cfg.theta[1]) return std::exp(log_point_probability_planar(n, q[0], q[1]));
  return point_probability_series(cfg, q, n)[static_cast<std::size_t>(n)];
}

// Exact P(S_n = q) for equal weights: number of paths over (2M)^n.
inline Rational point_probability_exact(int M, int n, const LatticePoint& q) {
  require(M >= 1 && M <= kMaxWalkDim && n >= 0, "bad walk size");
  if (point_parity(q, M) != n % 2 || l1_norm(q, M) > n) return Rational(0);
  // G(s): number of s-step paths on the first j coordinates ending at q there.
  auto binom = [](int a, int b) {
    BigInt r = 1;
    if (b < 0 || b > a) return BigInt(0);
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  std::vector<std::vector<BigInt>> C(static_cast<std::size_t>(n + 1));
  for (int s = 0; s <= n; ++s) {
    C[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(s + 1));
    for (int i = 0; i <= s; ++i) C[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] = binom(s, i);
  }
  auto axis = [&](int k, int qj) {
    int a = std::abs(qj);
    if (k < a || (k - a) % 2) return BigInt(0);
    return C[static_cast<std::size_t>(k)][static_cast<std::size_t>((k + a) / 2)];
  };
  std::vector<BigInt> G(static_cast<std::size_t>(n + 1));
  for (int s = 0; s <= n; ++s) G[static_cast<std::size_t>(s)] = axis(s, q[0]);
  for (int j = 1; j < M; ++j) {
    std::vector<BigInt> H(static_cast<std::size_t>(n + 1), BigInt(0));
    for (int s = 0; s <= n; ++s)
      for (int i = 0; i <= s; ++i) {
        BigInt a = axis(i, q[static_cast<std::size_t>(j)]);
        if (a == 0 || G[static_cast<std::size_t>(s - i)] == 0) continue;
        H[static_cast<std::size_t>(s)] += C[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] * a *
                                          G[static_cast<std::size_t>(s - i)];
      }
    G = std::move(H);
  }
  BigInt total = boost::multiprecision::pow(BigInt(2 * M), static_cast<unsigned>(n));
  return Rational(G[static_cast<std::size_t>(n)], total);
}

}  // namespace dioex
