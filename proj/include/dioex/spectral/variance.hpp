#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dioex/spectral/arcsine.hpp"
#include "dioex/spectral/window.hpp"
#include "dioex/walk/statistics.hpp"

namespace dioex {

inline constexpr const char* kVarianceNormalization = "T^2d/(2pi)";

// Volume of B(0,1) intersect B(z,1) at |z| = r.
inline double lens_volume(int d, double r) {
  if (r >= 2) return 0.0;
  switch (d) {
    case 1:
      return 2 - r;
    case 2:
      return 2 * std::acos(r / 2) - 0.5 * r * std::sqrt(4 - r * r);
    case 3:
      return M_PI * (4 + r) * (2 - r) * (2 - r) / 12;
    default: {
      auto f = [d](double x) { return std::pow(1 - x * x, 0.5 * (d - 1)); };
      return 2 * unit_ball_volume(d - 1) *
             boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, r / 2, 1.0, 10, 1e-12);
    }
  }
}

// Per-axis variance of one step of the projected walk U.
inline std::vector<double> step_variances(const WalkConfig& cfg) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  const Frequencies& f = *cfg.freqs;
  std::vector<double> s(static_cast<std::size_t>(f.d), 0.0);
  for (int k = 0; k < f.d; ++k) {
    auto x = f.extended(k);
    for (int i = 0; i <= f.m; ++i)
      s[static_cast<std::size_t>(k)] +=
          cfg.theta[static_cast<std::size_t>(k * (f.m + 1) + i)] * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }
  return s;
}

// E[window_hat(T G)^2] for G ~ N(0, n diag(sigma2)), via
// int lens(z) exp(-n T^2 sum_k sigma2_k z_k^2 / 2) dz.
inline double gaussian_window_moment(int d, double n, double T, const std::vector<double>& sigma2) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (d == 1) {
    const double a = 0.5 * n * T * T * sigma2[0];
    if (a < 1e-6) return 4 - 8 * a / 3;
    return 2 * (std::sqrt(M_PI / a) * std::erf(2 * std::sqrt(a)) - (1 - std::exp(-4 * a)) / (2 * a));
  }
  bool isotropic = true;
  for (double s : sigma2) isotropic = isotropic && s == sigma2[0];
  if (isotropic) {
    const double a = 0.5 * n * T * T * sigma2[0];
    const double sphere = d * unit_ball_volume(d);
    auto f = [&](double r) { return lens_volume(d, r) * std::pow(r, d - 1) * std::exp(-a * r * r); };
    return sphere * GK::integrate(f, 0.0, 2.0, 12, 1e-12);
  }
  // nested integration over the box [-2, 2]^d
  std::function<double(int, double, double)> rec = [&](int k, double r2, double quad) -> double {
    if (k == d) return r2 <= 4 ? lens_volume(d, std::sqrt(r2)) * std::exp(-quad) : 0.0;
    const double lim = std::sqrt(std::max(0.0, 4 - r2));
    auto g = [&](double z) {
      return rec(k + 1, r2 + z * z, quad + 0.5 * n * T * T * sigma2[static_cast<std::size_t>(k)] * z * z);
    };
    return GK::integrate(g, -lim, lim, 6, 1e-10);
  };
  return rec(0, 0.0, 0.0);
}

// sum over odd n > N of a_n E[window_hat(T G_n)^2], by Euler-Maclaurin (step 2) on the smooth continuation.
inline double gaussian_variance_tail(int d, int N, double T, const std::vector<double>& sigma2) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f = [&](double n) { return std::exp(log_series_weight(n)) * gaussian_window_moment(d, n, T, sigma2); };
  const double a = N % 2 ? N + 2.0 : N + 1.0;
  double integral = 0, lo = a, hi = 2 * a;
  for (int it = 0; it < 100; ++it) {
    integral += GK::integrate(f, lo, hi, 8, 1e-12);
    if (f(hi) * hi < 1e-16 * integral) break;
    lo = hi;
    hi *= 2;
  }
  integral += f(hi) * hi / (0.5 * (d + 1));
  const double fp = (f(a + 2) - f(a - 2)) / 4;
  const double fppp = (f(a + 4) - 2 * f(a + 2) + 2 * f(a - 2) - f(a - 4)) / 16;
  return 0.5 * integral + 0.5 * f(a) - fp / 6 + fppp / 90;
}

struct VarianceOptions {
  int nMax = 400;
  double prune = 1e-16;
  bool tailEstimate = true;
  std::size_t memoryBudget = std::size_t{1} << 30;
};

struct VarianceReport {
  double T = 0.0;
  int d = 1;
  TailedSum series;         // rigorous: value in [series.lo(), series.hi()]
  double tailEstimate = 0;  // Gaussian local-limit estimate of the truncated part
  double estimate = 0;      // series.partial + tailEstimate
  std::string normalization = kVarianceNormalization;
  std::optional<std::pair<double, double>> mcCrossCheck;  // (estimate, stderr)

  double lo() const { return series.lo(); }
  double hi() const { return series.hi(); }
};

// V(T) = T^{2d} sum_{odd n} a_n E[window_hat(T |U_n|)^2] for several T in one pass.
inline std::vector<VarianceReport> variance_series_multi(const WalkConfig& cfg, const std::vector<double>& Ts,
                                                         const VarianceOptions& o = {}) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(!Ts.empty(), "no window scales");
  for (double T : Ts) require(T > 0, "T must be positive");
  require(o.nMax >= 1, "nMax must be positive");
  const Frequencies& f = *cfg.freqs;
  const int d = f.d, m = f.m;
  const double kappa = unit_ball_volume(d);
  std::vector<double> head(Ts.size(), 0.0);
  double lostWeighted = 0, weightSum = 0;
  std::vector<std::vector<double>> ext;
  for (int k = 0; k < d; ++k) ext.push_back(f.extended(k));
  evolve_visit(
      cfg, o.nMax, o.prune,
      [&](const LatticeDistribution& dist) {
        if (dist.n % 2 == 0) return;
        const double a = series_weight(dist.n);
        weightSum += a;
        lostWeighted += a * dist.lostMass;
        std::vector<double> acc(Ts.size(), 0.0);
        for (const auto& e : dist.entries) {
          double r2 = 0;
          for (int k = 0; k < d; ++k) {
            double u = 0;
            for (int i = 0; i <= m; ++i)
              u += e.point[static_cast<std::size_t>(k * (m + 1) + i)] * ext[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            r2 += u * u;
          }
          const double r = std::sqrt(r2);
          for (std::size_t j = 0; j < Ts.size(); ++j) {
            const double g = window_hat(d, std::min(Ts[j] * r, 1e4));
            acc[j] += e.prob * g * g;
          }
        }
        for (std::size_t j = 0; j < Ts.size(); ++j) head[j] += a * acc[j];
      },
      o.memoryBudget);
  const auto sigma2 = step_variances(cfg);
  const double remaining = std::max(0.0, 0.25 - weightSum);
  std::vector<VarianceReport> out;
  for (std::size_t j = 0; j < Ts.size(); ++j) {
    VarianceReport r;
    r.T = Ts[j];
    r.d = d;
    const double scale = std::pow(Ts[j], 2 * d);
    r.series.partial = scale * head[j];
    r.series.nTruncation = o.nMax;
    r.series.mode = TailMode::Crude;
    r.series.lostInflation = scale * kappa * kappa * lostWeighted;
    r.series.tailBound = scale * kappa * kappa * remaining + r.series.lostInflation;
    if (o.tailEstimate) r.tailEstimate = scale * gaussian_variance_tail(d, o.nMax, Ts[j], sigma2);
    r.estimate = r.series.partial + r.tailEstimate;
    out.push_back(r);
  }
  return out;
}

inline VarianceReport variance_series(const WalkConfig& cfg, double T, int nMax, double prune = 1e-16) {
  VarianceOptions o;
  o.nMax = nMax;
  o.prune = prune;
  return variance_series_multi(cfg, {T}, o)[0];
}

// Level-u analogue: T^{2d} sum_{k=1..degree} c_k E[window_hat(T U_k)^2] with c_k fitted
// from the indicator-covariance integral; the remainder is bounded by Gamma_u(1) - sum c_k.
struct LevelVarianceReport {
  double T = 0.0;
  double u = 0.0;
  std::vector<double> coefficients;   // c_0..c_degree
  std::vector<double> contributions;  // T^{2d} c_k E[...], k = 0..degree
  double partial = 0.0;
  double tailBound = 0.0;
  double lowOrder = 0.0;  // k in {2, 4}
};

inline LevelVarianceReport variance_series_level(const WalkConfig& cfg, double T, double u, int degree = 8) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  const int d = cfg.freqs->d, m = cfg.freqs->m;
  LevelVarianceReport r;
  r.T = T;
  r.u = u;
  r.coefficients = fit_gamma_coefficients(u, degree);
  r.contributions.assign(static_cast<std::size_t>(degree + 1), 0.0);
  const double scale = std::pow(T, 2 * d);
  std::vector<std::vector<double>> ext;
  for (int k = 0; k < d; ++k) ext.push_back(cfg.freqs->extended(k));
  double used = 0;
  evolve_visit(cfg, degree, 0.0, [&](const LatticeDistribution& dist) {
    if (dist.n == 0) return;
    double acc = 0;
    for (const auto& e : dist.entries) {
      double r2 = 0;
      for (int k = 0; k < d; ++k) {
        double v = 0;
        for (int i = 0; i <= m; ++i)
          v += e.point[static_cast<std::size_t>(k * (m + 1) + i)] * ext[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        r2 += v * v;
      }
      const double g = window_hat(d, std::min(T * std::sqrt(r2), 1e4));
      acc += e.prob * g * g;
    }
    const double c = std::max(0.0, r.coefficients[static_cast<std::size_t>(dist.n)]);
    used += c;
    r.contributions[static_cast<std::size_t>(dist.n)] = scale * c * acc;
    r.partial += r.contributions[static_cast<std::size_t>(dist.n)];
  });
  const double kappa = unit_ball_volume(d);
  r.tailBound = scale * kappa * kappa * std::max(0.0, gamma_u(1.0, u) - used);
  r.lowOrder = r.contributions[2] + (degree >= 4 ? r.contributions[4] : 0.0);
  return r;
}

}  // namespace dioex
