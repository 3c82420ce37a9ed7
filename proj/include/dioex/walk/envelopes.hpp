#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "dioex/walk/lattice.hpp"

namespace dioex {

namespace detail {

// Number of lattice points with the same sorted absolute values as x.
inline double orbit_size(const LatticePoint& x, int M) {
  double perms = std::tgamma(M + 1.0), signs = 1;
  for (int i = 0; i < M;) {
    int j = i;
    while (j < M && x[static_cast<std::size_t>(j)] == x[static_cast<std::size_t>(i)]) ++j;
    perms /= std::tgamma(j - i + 1.0);
    i = j;
  }
  for (int i = 0; i < M; ++i)
    if (x[static_cast<std::size_t>(i)] != 0) signs *= 2;
  return perms * signs;
}

// Uniform walk on Z^M reduced by coordinate permutations and sign flips. visit(n, x, p)
// receives each orbit once, with x its sorted nonnegative representative and p the
// probability of any single point in it.
inline void evolve_orbits(int M, int nMax, const std::function<void(int, const LatticePoint&, double)>& visit) {
  require(M >= 1 && M <= kMaxWalkDim, "walk dimension out of range");
  std::map<LatticePoint, double> cur{{LatticePoint{}, 1.0}};
  const double step = 1.0 / (2 * M);
  for (int n = 0;; ++n) {
    for (const auto& [x, mass] : cur) visit(n, x, mass / orbit_size(x, M));
    if (n == nMax) break;
    std::map<LatticePoint, double> next;
    for (const auto& [x, mass] : cur)
      for (int j = 0; j < M; ++j)
        for (int s : {1, -1}) {
          LatticePoint y = x;
          y[static_cast<std::size_t>(j)] = std::abs(y[static_cast<std::size_t>(j)] + s);
          std::sort(y.begin(), y.begin() + M);
          next[y] += mass * step;
        }
    cur = std::move(next);
  }
}

}  // namespace detail

// Gaussian envelope P(S_n = q) <= cUpper n^{-M/2} exp(-cExp |q|^2 / n).
// Constants are fitted on n <= nMax/2 and checked, with a 25% margin, on n <= nMax.
struct EnvelopeFit {
  double cUpper = 0.0;
  double cExp = 0.0;
  std::size_t violations = 0;
  std::size_t checked = 0;
  int nFit = 0;
};

inline EnvelopeFit envelope_fit(const WalkConfig& cfg, int nMax, double margin = 1.25) {
  require(nMax >= 4, "envelope_fit needs nMax >= 4");
  cfg.validate();
  const int M = cfg.M();
  struct Sample {
    int n;
    double x;  // |q|^2 / n
    double y;  // P n^{M/2}
  };
  std::vector<Sample> samples;
  auto add = [&](int n, const LatticePoint& q, double p) {
    if (n > 0) samples.push_back({n, l2_norm_sq(q, M) / n, p * std::pow(static_cast<double>(n), 0.5 * M)});
  };
  // uniform walks are checked once per symmetry orbit
  if (cfg.uniform())
    detail::evolve_orbits(M, nMax, add);
  else
    evolve_visit(cfg, nMax, 0.0, [&](const LatticeDistribution& dist) {
      for (const auto& e : dist.entries) add(dist.n, e.point, e.prob);
    });
  EnvelopeFit fit;
  fit.nFit = nMax / 2;
  auto upper = [&](double c) {
    double u = 0;
    for (const auto& s : samples)
      if (s.n <= fit.nFit) u = std::max(u, s.y * std::exp(c * s.x));
    return u;
  };
  const double u0 = upper(0);
  double best = 0;
  for (int i = 1; i <= 400; ++i) {
    const double c = 0.005 * i;
    if (upper(c) <= 2 * u0)
      best = c;
    else
      break;
  }
  // the fit window overstates the usable exponent (near-ballistic points are
  // negligible at small n), so keep half of it
  fit.cExp = best / 2;
  fit.cUpper = upper(fit.cExp);
  for (const auto& s : samples) {
    ++fit.checked;
    if (s.y * std::exp(fit.cExp * s.x) > margin * fit.cUpper) ++fit.violations;
  }
  return fit;
}

struct GaussSumReport {
  std::vector<int> n;
  std::vector<double> ratio;
  double minRatio = 0.0;
  double maxRatio = 0.0;
  double limit = 0.0;  // (pi/theta)^{d/2} / 2
};

// sum over x in Z^d with coordinate sum = i (mod 2) of exp(-theta |x|^2 / n), over n^{d/2}.
inline double gauss_sum_ratio(int d, int i, int n, double theta = 1.0) {
  require(d >= 1 && (i == 0 || i == 1) && n >= 1 && theta > 0, "bad gauss_sum arguments");
  double even = 0, odd = 0;
  const double s = theta / n;
  for (long x = 0;; ++x) {
    const double t = std::exp(-s * static_cast<double>(x) * static_cast<double>(x));
    const double w = x == 0 ? t : 2 * t;
    (x % 2 == 0 ? even : odd) += w;
    if (x > 0 && t < 1e-18) break;
  }
  const double all = std::pow(even + odd, d), alt = std::pow(even - odd, d);
  const double sum = 0.5 * (all + (i == 0 ? alt : -alt));
  return sum / std::pow(static_cast<double>(n), 0.5 * d);
}

inline GaussSumReport gauss_sum_check(int d, int i, const std::vector<int>& nRange, double theta = 1.0) {
  require(!nRange.empty(), "nRange must be nonempty");
  GaussSumReport r;
  r.limit = 0.5 * std::pow(M_PI / theta, 0.5 * d);
  r.minRatio = INFINITY;
  r.maxRatio = -INFINITY;
  for (int n : nRange) {
    const double v = gauss_sum_ratio(d, i, n, theta);
    r.n.push_back(n);
    r.ratio.push_back(v);
    r.minRatio = std::min(r.minRatio, v);
    r.maxRatio = std::max(r.maxRatio, v);
  }
  return r;
}

inline double log_binomial_pmf(std::int64_t m, std::int64_t k, double theta) {
  if (k < 0 || k > m) return -INFINITY;
  return log_binomial(static_cast<double>(m), static_cast<double>(k)) + k * std::log(theta) +
         (m - k) * std::log1p(-theta);
}

// Two-sided envelope a m^{-1/2} exp(-A m eps^2) <= P(B = floor(m(theta + eps))) <= b m^{-1/2} exp(-c m eps^2)
// for B ~ Bin(m, theta). Constants are fitted on m up to the median of mRange.
struct BinomialEnvelopeReport {
  double lowerConst = 0.0, lowerExp = 0.0;
  double upperConst = 0.0, upperExp = 0.0;
  std::size_t violations = 0;
  std::size_t checked = 0;
  std::size_t excluded = 0;  // grid points outside |eps| <= cBin theta or m < 2
};

inline BinomialEnvelopeReport binomial_envelope_check(double theta, const std::vector<std::int64_t>& mRange,
                                                      const std::vector<double>& epsGrid, double cBin = 0.5,
                                                      double margin = 1.25) {
  require(theta > 0 && theta <= 0.75, "theta must lie in (0, 0.75]");
  require(!mRange.empty() && !epsGrid.empty(), "empty grid");
  struct Sample {
    std::int64_t m;
    double t;  // m eps^2
    double y;  // P sqrt(m)
  };
  std::vector<Sample> samples;
  BinomialEnvelopeReport r;
  std::vector<std::int64_t> ms = mRange;
  std::sort(ms.begin(), ms.end());
  const std::int64_t mFit = ms[ms.size() / 2];
  for (std::int64_t m : ms)
    for (double e : epsGrid) {
      if (m < 2 || std::abs(e) > cBin * theta) {
        ++r.excluded;
        continue;
      }
      const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(m) * (theta + e)));
      samples.push_back({m, static_cast<double>(m) * e * e,
                         std::exp(log_binomial_pmf(m, k, theta)) * std::sqrt(static_cast<double>(m))});
    }
  require(!samples.empty(), "no grid point within the contract");
  auto upper = [&](double c) {
    double u = 0;
    for (const auto& s : samples)
      if (s.m <= mFit) u = std::max(u, s.y * std::exp(c * s.t));
    return u;
  };
  auto lower = [&](double c) {
    double l = INFINITY;
    for (const auto& s : samples)
      if (s.m <= mFit) l = std::min(l, s.y * std::exp(c * s.t));
    return l;
  };
  const double u0 = upper(0);
  double c = 0;
  for (int i = 1; i <= 2000; ++i) {
    if (upper(0.005 * i) > 2 * u0) break;
    c = 0.005 * i;
  }
  // smallest A whose lower amplitude reaches half the largest observed one
  double A = 0.005;
  for (int i = 1; i <= 20000; ++i) {
    A = 0.005 * i;
    if (lower(A) >= 0.5 * u0) break;
  }
  // 10% exponent slack so the fitted window extends to larger m
  r.upperExp = 0.9 * c;
  r.upperConst = upper(r.upperExp);
  r.lowerExp = 1.1 * A;
  r.lowerConst = lower(r.lowerExp);
  for (const auto& s : samples) {
    ++r.checked;
    const double up = r.upperConst * std::exp(-r.upperExp * s.t) * margin;
    const double lo = r.lowerConst * std::exp(-r.lowerExp * s.t) / margin;
    if (s.y > up || s.y < lo || !(r.lowerConst > 0)) ++r.violations;
  }
  return r;
}

}  // namespace dioex
