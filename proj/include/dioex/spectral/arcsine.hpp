#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "dioex/core.hpp"

namespace dioex {

// alpha_n = C(2k, k) / (4^k (2k + 1)) for n = 2k + 1, 0 for even n: Taylor
// coefficients of arcsin.
inline double arcsine_coeff(std::int64_t n) {
  require(n >= 0, "index must be nonnegative");
  if (n % 2 == 0) return 0.0;
  const double k = static_cast<double>((n - 1) / 2);
  return std::exp(log_binomial(2 * k, k) - k * std::log(4.0)) / (2 * k + 1);
}

inline Rational arcsine_coeff_exact(std::int64_t n) {
  require(n >= 0, "index must be nonnegative");
  if (n % 2 == 0) return Rational(0);
  const std::int64_t k = (n - 1) / 2;
  BigInt c = 1;
  for (std::int64_t i = 1; i <= k; ++i) c = c * (k + i) / i;
  BigInt den = 1;
  for (std::int64_t i = 0; i < k; ++i) den *= 4;
  return Rational(c, den * (2 * k + 1));
}

// Real-index continuation of log(alpha_n / (2 pi)) for odd n.
inline double log_series_weight(double n) {
  const double k = (n - 1) / 2;
  return log_binomial(2 * k, k) - k * std::log(4.0) - std::log(2 * k + 1) - std::log(2 * M_PI);
}

// a_n = alpha_n / (2 pi), the indicator-covariance weights at level 0 (sum over odd n = 1/4).
inline double series_weight(std::int64_t n) { return arcsine_coeff(n) / (2 * M_PI); }

// Bound on sum_{odd n > N} a_n from C(2k,k)/4^k <= 1/sqrt(pi k).
inline double series_weight_tail(std::int64_t N) {
  const double K = std::max<double>(1.0, static_cast<double>((N - 1) / 2));
  return 1.0 / (2 * M_PI * std::sqrt(M_PI * K));
}

// sum_{odd n <= N} a_n.
inline double series_weight_partial(std::int64_t N) {
  double s = 0, a = 1.0;  // a = C(2k,k)/4^k
  for (std::int64_t k = 0; 2 * k + 1 <= N; ++k) {
    s += a / (2.0 * k + 1);
    a *= (2.0 * k + 1) / (2.0 * k + 2);
  }
  return s / (2 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Gamma_u(rho) = Cov(1{X > u}, 1{Y > u}) for standard Gaussians with correlation rho,
// as (1/2pi) int_0^rho exp(-u^2/(1+r)) / sqrt(1-r^2) dr.
inline double gamma_u(double rho, double u) {
  require(rho >= -1 && rho <= 1, "rho must lie in [-1, 1]");
  const double tail = normal_cdf(-u);
  if (rho == 1) return tail * (1 - tail);
  if (rho == -1) return u >= 0 ? -tail * tail : (normal_cdf(-u) - normal_cdf(u)) - tail * tail;
  if (rho == 0) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [u](double r) {
    const double w = (1 - r) * (1 + r);
    return w > 0 ? std::exp(-u * u / (1 + r)) / std::sqrt(w) : 0.0;
  };
  const double a = std::min(0.0, rho), b = std::max(0.0, rho);
  const double v = integrator.integrate(f, a, b, 1e-14);
  return (rho > 0 ? v : -v) / (2 * M_PI);
}

// Probabilists' Hermite polynomial He_k(x).
inline double hermite_he(int k, double x) {
  if (k == 0) return 1.0;
  double a = 1.0, b = x;
  for (int j = 1; j < k; ++j) {
    const double c = x * b - j * a;
    a = b;
    b = c;
  }
  return b;
}

// Series coefficients of Gamma_u: phi(u)^2 He_{k-1}(u)^2 / k!.
inline double hermite_coeff(int k, double u) {
  require(k >= 1, "k must be positive");
  const double phi2 = std::exp(-u * u) / (2 * M_PI);
  const double h = hermite_he(k - 1, u);
  return phi2 * h * h / std::exp(std::lgamma(k + 1.0));
}

// Coefficients 0..degree of a least-squares polynomial fit to Gamma_u on
// [-radius, radius] (Chebyshev nodes), where the power series converges geometrically.
inline std::vector<double> fit_gamma_coefficients(double u, int degree = 8, double radius = 0.5, int nodes = 64) {
  require(degree >= 1 && nodes > degree, "bad fit size");
  const int P = degree + 1;
  std::vector<double> ata(static_cast<std::size_t>(P * P), 0.0), atb(static_cast<std::size_t>(P), 0.0);
  for (int j = 0; j < nodes; ++j) {
    const double x = std::cos(M_PI * (j + 0.5) / nodes);  // scaled variable in [-1, 1]
    const double y = gamma_u(radius * x, u);
    std::vector<double> pw(static_cast<std::size_t>(P));
    pw[0] = 1;
    for (int i = 1; i < P; ++i) pw[static_cast<std::size_t>(i)] = pw[static_cast<std::size_t>(i - 1)] * x;
    for (int a = 0; a < P; ++a) {
      atb[static_cast<std::size_t>(a)] += pw[static_cast<std::size_t>(a)] * y;
      for (int b = 0; b < P; ++b)
        ata[static_cast<std::size_t>(a * P + b)] += pw[static_cast<std::size_t>(a)] * pw[static_cast<std::size_t>(b)];
    }
  }
  // Gaussian elimination with partial pivoting on the normal equations
  std::vector<double> c = atb;
  for (int col = 0; col < P; ++col) {
    int piv = col;
    for (int r = col + 1; r < P; ++r)
      if (std::abs(ata[static_cast<std::size_t>(r * P + col)]) > std::abs(ata[static_cast<std::size_t>(piv * P + col)]))
        piv = r;
    if (piv != col) {
      for (int k = 0; k < P; ++k)
        std::swap(ata[static_cast<std::size_t>(col * P + k)], ata[static_cast<std::size_t>(piv * P + k)]);
      std::swap(c[static_cast<std::size_t>(col)], c[static_cast<std::size_t>(piv)]);
    }
    for (int r = col + 1; r < P; ++r) {
      const double f = ata[static_cast<std::size_t>(r * P + col)] / ata[static_cast<std::size_t>(col * P + col)];
      for (int k = col; k < P; ++k)
        ata[static_cast<std::size_t>(r * P + k)] -= f * ata[static_cast<std::size_t>(col * P + k)];
      c[static_cast<std::size_t>(r)] -= f * c[static_cast<std::size_t>(col)];
    }
  }
  for (int r = P - 1; r >= 0; --r) {
    double s = c[static_cast<std::size_t>(r)];
    for (int k = r + 1; k < P; ++k) s -= ata[static_cast<std::size_t>(r * P + k)] * c[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(r)] = s / ata[static_cast<std::size_t>(r * P + r)];
  }
  double scale = 1;
  for (int i = 0; i < P; ++i) {
    c[static_cast<std::size_t>(i)] /= scale;
    scale *= radius;
  }
  return c;
}

}  // namespace dioex
