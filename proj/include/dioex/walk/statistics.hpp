#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dioex/walk/lattice.hpp"

namespace dioex {

// Subset K of axes as a bitmask (bit k for axis k + 1).
using AxisSet = std::uint32_t;

inline std::string axis_set_label(AxisSet K) {
  if (K == 0) return "0";
  std::string s;
  for (int k = 0; k < 32; ++k)
    if (K & (1u << k)) {
      if (!s.empty()) s += '+';
      s += std::to_string(k + 1);
    }
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Projection U = qbar (x) omegabar, per axis, with classification against
// balls and exact-zero tests. Values are accumulated in double-double; points
// within the rounding band are decided exactly (symbolic descriptors) or at
// working precision.
class Projector {
 public:
  explicit Projector(const Frequencies& f) : freqs_(f), d_(f.d), m_(f.m) {
    for (int k = 0; k < d_; ++k) {
      ptrs_.push_back(f.axis_ptrs(k));
      bool rational = true;
      for (auto* p : ptrs_.back()) rational = rational && p->is_rational();
      rational_axis_.push_back(rational);
    }
  }

  int d() const { return d_; }
  int m() const { return m_; }

  struct AxisValue {
    double value = 0.0;
    double band = 0.0;
    bool zero = false;
  };

  // U_k(q) - shift, classified as zero or not.
  AxisValue axis(const LatticePoint& q, int k, std::int64_t shift = 0) const {
    const std::size_t base = static_cast<std::size_t>(k * (m_ + 1));
    const std::int64_t c0 = q[base] - shift;
    double hi = static_cast<double>(c0), lo = 0, scale = std::abs(hi);
    bool only_c0 = true;
    for (int i = 1; i <= m_; ++i) {
      const std::int32_t ci = q[base + static_cast<std::size_t>(i)];
      if (ci == 0) continue;
      only_c0 = false;
      const Frequency& f = *ptrs_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i - 1)];
      const double prod = ci * f.approx;
      const double perr = std::fma(static_cast<double>(ci), f.approx, -prod);
      const double s = hi + prod;
      const double bb = s - hi;
      lo += (hi - (s - bb)) + (prod - bb) + perr + ci * f.approx_lo;
      hi = s;
      scale += std::abs(prod);
    }
    AxisValue out;
    out.value = hi + lo;
    out.band = (m_ + 2) * scale * 0x1p-98 + 1e-300;
    if (only_c0) {
      out.zero = c0 == 0;
      out.band = 0;
      return out;
    }
    if (std::abs(out.value) > out.band) return out;
    out.zero = decide_zero(q, k, c0);
    if (out.zero) out.value = 0;
    return out;
  }

  // |sum_k U_k^2| <= eps^2 with boundary points included.
  bool in_ball(const LatticePoint& q, const AxisValue* vals, const std::int64_t* shift, double eps) const {
    double s = 0, band = 0;
    for (int k = 0; k < d_; ++k) {
      const auto& v = vals[k];
      s += v.value * v.value;
      band += 2 * std::abs(v.value) * v.band + v.band * v.band;
    }
    const double e2 = eps * eps;
    band += (s + e2) * 0x1p-50;
    if (s < e2 - band) return true;
    if (s > e2 + band) return false;
    return decide_ball(q, shift, eps);
  }

 private:
  bool decide_zero(const LatticePoint& q, int k, std::int64_t c0) const {
    const std::size_t base = static_cast<std::size_t>(k * (m_ + 1));
    std::vector<std::int64_t> c;
    for (int i = 1; i <= m_; ++i) c.push_back(q[base + static_cast<std::size_t>(i)]);
    const auto& w = ptrs_[static_cast<std::size_t>(k)];
    if (auto z = exact_is_zero(c0, c, w)) return *z;
    LinearValue lv = eval_linear(c0, c, w);
    if (boost::multiprecision::abs(lv.value) > lv.error) return false;
    throw PrecisionExhausted("projection indistinguishable from 0 at the configured precision");
  }

  bool decide_ball(const LatticePoint& q, const std::int64_t* shift, double eps) const {
    bool rational = true;
    for (int k = 0; k < d_; ++k) rational = rational && rational_axis_[static_cast<std::size_t>(k)];
    if (rational) {
      Rational s = 0;
      for (int k = 0; k < d_; ++k) {
        const std::size_t base = static_cast<std::size_t>(k * (m_ + 1));
        Rational u(q[base] - (shift ? shift[k] : 0));
        for (int i = 1; i <= m_; ++i)
          u += Rational(q[base + static_cast<std::size_t>(i)]) *
               ptrs_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i - 1)]->rational();
        s += u * u;
      }
      Rational e = to_rational(eps);
      return s <= e * e;
    }
    HighReal s = 0, err = 0;
    for (int k = 0; k < d_; ++k) {
      const std::size_t base = static_cast<std::size_t>(k * (m_ + 1));
      std::vector<std::int64_t> c;
      for (int i = 1; i <= m_; ++i) c.push_back(q[base + static_cast<std::size_t>(i)]);
      LinearValue lv = eval_linear(q[base] - (shift ? shift[k] : 0), c, ptrs_[static_cast<std::size_t>(k)]);
      s += lv.value * lv.value;
      err += 2 * boost::multiprecision::abs(lv.value) * lv.error + lv.error * lv.error;
    }
    HighReal e2 = HighReal(eps) * HighReal(eps);
    if (s <= e2 - err) return true;
    if (s > e2 + err) return false;
    throw PrecisionExhausted("projection on the ball boundary within tracked error");
  }

  static Rational to_rational(double x) {
    int e = 0;
    double f = std::frexp(x, &e);
    auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
    Rational r(mant);
    e -= 53;
    BigInt two = 1;
    for (int i = 0; i < std::abs(e); ++i) two *= 2;
    return e >= 0 ? r * Rational(two) : r / Rational(two);
  }

  Frequencies freqs_;
  int d_, m_;
  std::vector<std::vector<const Frequency*>> ptrs_;
  std::vector<bool> rational_axis_;
};

// Ball masses of one distribution split by the nonzero pattern K.
struct BallMasses {
  std::vector<double> byK;  // index = AxisSet
  double lost = 0.0;

  double nonzero() const {
    double s = 0;
    for (std::size_t K = 1; K < byK.size(); ++K) s += byK[K];
    return s;
  }
};

// For each eps: mass of points with U - x in the closed eps-ball (x = 0), or,
// when torus is set, with the fractional reduction of U in the ball.
inline std::vector<BallMasses> ball_masses(const Projector& proj, const LatticeDistribution& dist,
                                           const std::vector<double>& eps, bool torus,
                                           const std::vector<std::int64_t>& x = {}) {
  const int d = proj.d();
  const std::size_t nK = std::size_t{1} << d;
  std::vector<BallMasses> out(eps.size());
  for (auto& b : out) {
    b.byK.assign(nK, 0.0);
    b.lost = dist.lostMass;
  }
  std::vector<Projector::AxisValue> vals(static_cast<std::size_t>(d));
  std::vector<std::int64_t> shift(static_cast<std::size_t>(d), 0);
  for (const auto& e : dist.entries) {
    AxisSet K = 0;
    for (int k = 0; k < d; ++k) {
      std::int64_t s = x.empty() ? 0 : x[static_cast<std::size_t>(k)];
      if (torus) {
        auto v0 = proj.axis(e.point, k, 0);
        s = static_cast<std::int64_t>(std::llround(v0.value));
      }
      shift[static_cast<std::size_t>(k)] = s;
      vals[static_cast<std::size_t>(k)] = proj.axis(e.point, k, s);
      if (!vals[static_cast<std::size_t>(k)].zero) K |= 1u << k;
    }
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (proj.in_ball(e.point, vals.data(), shift.data(), eps[i])) out[i].byK[K] += e.prob;
  }
  return out;
}

inline Interval p_n_K(const WalkConfig& cfg, const LatticeDistribution& dist, double eps, AxisSet K,
                      const std::vector<std::int64_t>& x) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(eps > 0, "eps must be positive");
  Projector proj(*cfg.freqs);
  require(static_cast<int>(x.size()) == proj.d(), "x must have one entry per axis");
  auto b = ball_masses(proj, dist, {eps}, false, x)[0];
  return {b.byK[K], b.byK[K] + b.lost};
}

inline Interval pbar_n_K(const WalkConfig& cfg, const LatticeDistribution& dist, double eps, AxisSet K) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(eps > 0, "eps must be positive");
  Projector proj(*cfg.freqs);
  auto b = ball_masses(proj, dist, {eps}, true)[0];
  return {b.byK[K], b.byK[K] + b.lost};
}

enum class TailMode { Crude, Envelope };

inline const char* tail_mode_name(TailMode m) { return m == TailMode::Crude ? "crude" : "envelope"; }

// Truncated series with a tail bound; the value lies in [partial, partial + tailBound].
struct TailedSum {
  double partial = 0.0;
  double tailBound = 0.0;
  int nTruncation = 0;
  TailMode mode = TailMode::Crude;
  double lostInflation = 0.0;  // part of tailBound due to pruned mass

  double lo() const { return partial; }
  double hi() const { return partial + tailBound; }
};

// int_N^inf x^{-beta/2} dx, which dominates sum_{n > N} n^{-beta/2}.
inline double crude_power_tail(double beta, int N) {
  require(beta > 2, "beta must exceed 2");
  return 2 * std::pow(static_cast<double>(std::max(N, 1)), 1 - beta / 2) / (beta - 2);
}

struct RecurrenceOptions {
  double beta = 3.0;
  int nEps = 1;
  int nMax = 100;
  TailMode mode = TailMode::Crude;
  double prune = 1e-16;
  std::size_t memoryBudget = std::size_t{1} << 30;
};

namespace detail {

inline std::vector<TailedSum> recurrence_series(const WalkConfig& cfg, const std::vector<double>& eps,
                                                const RecurrenceOptions& o, bool torus) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(o.beta > 2, "beta must exceed 2");
  require(o.nEps >= 1 && o.nMax >= 0, "bad truncation");
  for (double e : eps) require(e > 0, "eps must be positive");
  Projector proj(*cfg.freqs);
  std::vector<TailedSum> out(eps.size());
  std::vector<double> last_decade_max(eps.size(), 0.0);
  evolve_visit(cfg, o.nMax, o.prune, [&](const LatticeDistribution& dist) {
    const int n = dist.n;
    if (n < o.nEps || n == 0) return;
    if (!torus && n % 2 == 0) return;
    const double w = std::pow(static_cast<double>(n), -o.beta / 2);
    auto b = ball_masses(proj, dist, eps, torus);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double s = b[i].nonzero();
      out[i].partial += w * s;
      out[i].lostInflation += w * b[i].lost;
      if (10 * n > o.nMax) last_decade_max[i] = std::max(last_decade_max[i], s + b[i].lost);
    }
  }, o.memoryBudget);
  const double tail = crude_power_tail(o.beta, o.nMax);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    out[i].nTruncation = o.nMax;
    out[i].mode = o.mode;
    const double t = o.mode == TailMode::Crude ? tail : tail * last_decade_max[i];
    out[i].tailBound = t + out[i].lostInflation;
  }
  return out;
}

}  // namespace detail

// J_beta(eps) = sum over odd n >= nEps of n^{-beta/2} P(0 < |U_n| <= eps).
inline std::vector<TailedSum> J_beta_grid(const WalkConfig& cfg, const std::vector<double>& eps,
                                          const RecurrenceOptions& o) {
  return detail::recurrence_series(cfg, eps, o, false);
}

inline TailedSum J_beta(const WalkConfig& cfg, double beta, double eps, int nEps, int nMax,
                        TailMode mode = TailMode::Crude, double prune = 1e-16) {
  return J_beta_grid(cfg, {eps}, {beta, nEps, nMax, mode, prune})[0];
}

// I_beta(eps) = sum over all n >= nEps of n^{-beta/2} P(0 < |Ubar_n| <= eps).
inline std::vector<TailedSum> I_beta_grid(const WalkConfig& cfg, const std::vector<double>& eps,
                                          const RecurrenceOptions& o) {
  return detail::recurrence_series(cfg, eps, o, true);
}

inline TailedSum I_beta(const WalkConfig& cfg, double beta, double eps, int nEps, int nMax,
                        TailMode mode = TailMode::Crude, double prune = 1e-16) {
  return I_beta_grid(cfg, {eps}, {beta, nEps, nMax, mode, prune})[0];
}

struct RecurrenceRow {
  int n;
  double eps;
  AxisSet K;
  double lo;
  double hi;
};

// Rows (n, eps, K, lo, hi) of p_n^K (or pbar_n^K when torus) for every K.
inline std::vector<RecurrenceRow> recurrence_rows(const WalkConfig& cfg, int nMax, const std::vector<double>& eps,
                                                  bool torus, double prune = 1e-16,
                                                  std::size_t memoryBudget = std::size_t{1} << 30) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  Projector proj(*cfg.freqs);
  std::vector<RecurrenceRow> rows;
  evolve_visit(cfg, nMax, prune, [&](const LatticeDistribution& dist) {
    auto b = ball_masses(proj, dist, eps, torus);
    for (std::size_t i = 0; i < eps.size(); ++i)
      for (std::size_t K = 0; K < b[i].byK.size(); ++K)
        rows.push_back({dist.n, eps[i], static_cast<AxisSet>(K), b[i].byK[K], b[i].byK[K] + b[i].lost});
  }, memoryBudget);
  return rows;
}

}  // namespace dioex
