#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dioex/dioph.hpp"
#include "dioex/walk/point_probability.hpp"
#include "dioex/walk/statistics.hpp"

namespace dioex {

// Weights w_n of a series sum_n w_n P(S_n = q). `log_w` must accept real n (it
// is used for the smooth continuation); `tail(N)` bounds sum_{n > N} w_n.
struct SeriesWeights {
  std::function<double(double)> log_w;
  std::function<double(std::int64_t)> tail;
  bool odd_only = true;
  std::int64_t n_min = 1;
};

inline SeriesWeights power_weights(double beta, std::int64_t nEps = 1) {
  require(beta > 2, "beta must exceed 2");
  SeriesWeights w;
  w.log_w = [beta](double n) { return -0.5 * beta * std::log(n); };
  w.tail = [beta](std::int64_t N) { return crude_power_tail(beta, static_cast<int>(std::min<std::int64_t>(N, 1 << 30))); };
  w.n_min = nEps;
  return w;
}

struct TargetedOptions {
  std::int64_t exactMin = 4000;      // always sum exactly up to here
  std::int64_t exactCap = 4'000'000;  // never sum exactly beyond here
  double exactFactor = 0.0;           // exact up to exactFactor * |q|^2 when positive
  std::int64_t generalCap = 3000;     // exact range when no smooth continuation exists
};

struct PointSeries {
  double exact = 0.0;      // sum over n <= nExact (a lower bound)
  double tailBound = 0.0;  // rigorous bound for n > nExact
  double estimate = 0.0;   // exact + smooth-continuation tail
  std::int64_t nExact = 0;
  bool continued = false;
};

namespace detail {

inline bool planar_equal(const WalkConfig& cfg) { return cfg.M() == 2 && cfg.theta[0] == cfg.theta[1]; }

}  // namespace detail

// sum over admissible n of w_n P(S_n = q) for one lattice point.
inline PointSeries point_series(const WalkConfig& cfg, const LatticePoint& q, const SeriesWeights& w,
                                const TargetedOptions& opt = {}) {
  cfg.validate();
  const int M = cfg.M();
  const int par = point_parity(q, M);
  PointSeries out;
  if (w.odd_only && par == 0) return out;
  const std::int64_t l1 = l1_norm(q, M);
  std::int64_t n0 = std::max<std::int64_t>(w.n_min, l1);
  if (n0 % 2 != par) ++n0;
  const int step = 2;  // P(S_n = q) vanishes off the parity class

  if (detail::planar_equal(cfg)) {
    const double qq = l2_norm_sq(q, M);
    std::int64_t N = std::max<std::int64_t>(opt.exactMin, n0);
    if (opt.exactFactor > 0) N = std::max<std::int64_t>(N, static_cast<std::int64_t>(opt.exactFactor * qq));
    N = std::min(N, std::max(opt.exactCap, n0));
    const double a0 = q[0], a1 = q[1];
    // smooth in n; only evaluated on the right parity class when summing exactly
    auto logf = [&](double n) { return w.log_w(n) + detail::log_p1(n, a0 + a1) + detail::log_p1(n, a0 - a1); };
    double s = 0;
    std::int64_t last = n0 - step;
    for (std::int64_t n = n0; n <= N; n += step) {
      s += std::exp(logf(static_cast<double>(n)));
      last = n;
    }
    out.exact = s;
    out.nExact = last;
    const std::int64_t E = 2 * ((last + 1) / 2);
    out.tailBound = std::exp(log_point_probability_planar(static_cast<double>(E), 0, 0)) * w.tail(last);

    // Euler-Maclaurin with step 2 on the smooth interpolant beyond `last`.
    auto f = [&](double x) {
      double v = logf(x);
      return v == detail::kNegInf ? 0.0 : std::exp(v);
    };
    const double a = static_cast<double>(last + step);
    double integral = 0;
    double lo = a, hi = 2 * a;
    for (int it = 0; it < 200; ++it) {
      double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 8, 1e-12);
      integral += piece;
      if (hi > 8 * qq && f(hi) * hi < 1e-15 * (integral + s + 1e-300)) break;
      lo = hi;
      hi *= 2;
    }
    // remaining power-law tail int_hi^inf ~ f(hi) hi / (beta_eff - 1), beta_eff >= 2
    integral += f(hi) * hi;
    const double fp = (f(a + 2) - f(a - 2)) / 4;
    const double fppp = (f(a + 4) - 2 * f(a + 2) + 2 * f(a - 2) - f(a - 4)) / 16;
    const double em = 0.5 * integral + 0.5 * f(a) - (2.0 / 12.0) * fp + (8.0 / 720.0) * fppp;
    out.estimate = s + std::max(0.0, em);
    out.continued = true;
    return out;
  }

  const std::int64_t N = std::max<std::int64_t>(std::min(opt.generalCap, opt.exactCap), n0);
  auto series = point_probability_series(cfg, q, static_cast<int>(N));
  double s = 0;
  std::int64_t last = n0 - step;
  for (std::int64_t n = n0; n <= N; n += step) {
    s += std::exp(w.log_w(static_cast<double>(n))) * series[static_cast<std::size_t>(n)];
    last = n;
  }
  out.exact = s;
  out.nExact = last;
  const std::int64_t E = 2 * ((last + 1) / 2);
  out.tailBound = point_probability(cfg, static_cast<int>(E), LatticePoint{}) * w.tail(last);
  out.estimate = s;
  return out;
}

// Lattice points with 0 < |U(q)| <= eps whose per-axis q-part has |q| <= Qmax,
// enumerated from the per-axis sets I_eps; assumes Z-free frequencies.
inline std::vector<LatticePoint> targeted_points(const WalkConfig& cfg, double eps, std::int64_t Qmax) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(eps > 0 && eps < 0.5, "eps must lie in (0, 1/2)");
  const Frequencies& f = *cfg.freqs;
  const int d = f.d, m = f.m;
  require(m >= 1, "targeted enumeration needs m >= 1");
  std::vector<std::vector<std::vector<std::int32_t>>> cand(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    auto& c = cand[static_cast<std::size_t>(k)];
    c.push_back(std::vector<std::int32_t>(static_cast<std::size_t>(m + 1), 0));
    auto set = i_eps_set(f.omega[static_cast<std::size_t>(k)], eps, Qmax);
    for (const auto& e : set.elements) {
      std::vector<std::int32_t> plus{static_cast<std::int32_t>(-e.p)};
      for (auto v : e.q) plus.push_back(static_cast<std::int32_t>(v));
      std::vector<std::int32_t> minus = plus;
      for (auto& v : minus) v = -v;
      c.push_back(plus);
      c.push_back(minus);
    }
  }
  Projector proj(f);
  std::vector<LatticePoint> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  std::vector<Projector::AxisValue> vals(static_cast<std::size_t>(d));
  for (;;) {
    bool all_zero = true;
    LatticePoint p{};
    for (int k = 0; k < d; ++k) {
      const auto& t = cand[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
      for (int i = 0; i <= m; ++i) p[static_cast<std::size_t>(k * (m + 1) + i)] = t[static_cast<std::size_t>(i)];
      all_zero = all_zero && idx[static_cast<std::size_t>(k)] == 0;
    }
    if (!all_zero) {
      for (int k = 0; k < d; ++k) vals[static_cast<std::size_t>(k)] = proj.axis(p, k);
      if (proj.in_ball(p, vals.data(), nullptr, eps)) out.push_back(p);
    }
    int k = d - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == cand[static_cast<std::size_t>(k)].size())
      idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct TargetedReport {
  double eps = 0.0;
  std::int64_t qmax = 0;
  std::size_t points = 0;
  double lo = 0.0;        // rigorous lower bound (exact partial sums)
  double hi = 0.0;        // lo plus rigorous per-point tails
  double estimate = 0.0;  // exact partial plus smooth-continuation tails
};

inline TargetedReport targeted_sum(const WalkConfig& cfg, double eps, std::int64_t Qmax, const SeriesWeights& w,
                                   const TargetedOptions& opt = {}) {
  TargetedReport r;
  r.eps = eps;
  r.qmax = Qmax;
  auto pts = targeted_points(cfg, eps, Qmax);
  r.points = pts.size();
  for (const auto& p : pts) {
    PointSeries s = point_series(cfg, p, w, opt);
    r.lo += s.exact;
    r.hi += s.exact + s.tailBound;
    r.estimate += s.estimate;
  }
  return r;
}

// Large-scale J_beta(eps) restricted to |q| <= Qmax.
inline TargetedReport J_beta_targeted(const WalkConfig& cfg, double beta, double eps, std::int64_t nEps,
                                      std::int64_t Qmax, const TargetedOptions& opt = {}) {
  return targeted_sum(cfg, eps, Qmax, power_weights(beta, nEps), opt);
}

}  // namespace dioex
