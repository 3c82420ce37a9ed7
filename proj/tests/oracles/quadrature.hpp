#pragma once

#include <cmath>
#include <algorithm>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using GK61 = boost::math::quadrature::gauss_kronrod<double, 61>;

inline double upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Cov(1{X>u}, 1{Y>u}) from P(X>u, Y>u) = int_u^inf phi(x) P(Y>u | X=x) dx.
inline double indicator_covariance(double rho, double u) {
  const double s = std::sqrt(1 - rho * rho);
  auto f = [&](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI) * upper_tail((u - rho * x) / s);
  };
  const double joint = GK61::integrate(f, u, u + 40, 15, 1e-14);
  const double q = upper_tail(u);
  return joint - q * q;
}

// int_{-1}^{1} 2 sqrt(1 - x^2) cos(r x) dx, the planar ball transform as an area integral.
inline double disk_transform(double r) {
  auto f = [&](double x) { return 2 * std::sqrt(1 - x * x) * std::cos(r * x); };
  return GK61::integrate(f, -1.0, 1.0, 15, 1e-14);
}

// Var of the excursion length on [-T, T] for a 1-d field with covariance C at level 0:
// int int asin(C(t - s)) / (2 pi) dt ds over [-T, T]^2.
inline double excursion_variance_1d(const std::function<double(double)>& C, double T) {
  auto f = [&](double tau) { return (2 * T - std::abs(tau)) * std::asin(std::clamp(C(tau), -1.0, 1.0)) / (2 * M_PI); };
  double total = 0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(4 * T)));
  for (int i = 0; i < pieces; ++i) {
    const double a = 2 * T * i / pieces, b = 2 * T * (i + 1) / pieces;
    total += GK61::integrate(f, a, b, 12, 1e-13);
  }
  return 2 * total;
}

// The same double integral by nested quadrature over the square, splitting the inner
// integral at the diagonal where asin(C(t - s)) has a kink.
inline double excursion_variance_2d(const std::function<double(double)>& C, double T) {
  auto g = [&](double t) {
    auto f = [&](double s) { return std::asin(std::clamp(C(t - s), -1.0, 1.0)) / (2 * M_PI); };
    return GK61::integrate(f, -T, t, 10, 1e-13) + GK61::integrate(f, t, T, 10, 1e-13);
  };
  return GK61::integrate(g, -T, T, 10, 1e-12);
}

}  // namespace oracle
