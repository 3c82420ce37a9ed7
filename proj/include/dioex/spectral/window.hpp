#pragma once

#include <cmath>

#include "dioex/core.hpp"

namespace dioex {

// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  require(d >= 1, "dimension must be positive");
  return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1);
}

namespace detail {

// J1(r) / r by its power series; accurate for r <= 8.
inline double j1_over_r_series(double r) {
  const double h = -0.25 * r * r;
  double term = 0.5, sum = 0.5;
  for (int k = 1; k < 60; ++k) {
    term *= h / (k * (k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

// Fourier transform of the unit-ball indicator, int_{|x|<=1} e^{i t.x} dx at |t| = r.
inline double window_hat(int d, double r) {
  require(d >= 1, "dimension must be positive");
  require(r >= 0, "radius must be nonnegative");
  require(r <= 1e4, "argument beyond the supported range");
  switch (d) {
    case 1:
      if (r < 1e-4) return 2 * (1 - r * r / 6);
      return 2 * std::sin(r) / r;
    case 2:
      if (r <= 8) return 2 * M_PI * detail::j1_over_r_series(r);
      return 2 * M_PI * std::cyl_bessel_j(1.0, r) / r;
    case 3: {
      if (r < 1e-2) {
        const double r2 = r * r;
        return 4 * M_PI / 3 * (1 - r2 / 10 + r2 * r2 / 280 - r2 * r2 * r2 / 15120);
      }
      return 4 * M_PI * (std::sin(r) - r * std::cos(r)) / (r * r * r);
    }
    default:
      if (r == 0) return unit_ball_volume(d);
      return std::pow(2 * M_PI / r, 0.5 * d) * std::cyl_bessel_j(0.5 * d, r);
  }
}

struct WindowTransform {
  int d = 1;
  double kappa = 0.0;              // window_hat(0)
  double firstZero = 0.0;
  double radiusOfPositivity = 0.5;  // window_hat > 0 on B(0, 4r)
  double maxRadius = 0.0;           // firstZero / 4
  double positivityFloor = 0.0;     // min of window_hat on [0, 4r]
  double c3 = 0.0;                  // sup |window_hat(r)| r^{(d+1)/2} over [1, 1e3]
};

inline double window_first_zero(int d) {
  // bracket by scanning, then bisect
  double a = 0.5, step = 0.01;
  while (window_hat(d, a + step) > 0) a += step;
  double b = a + step;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double mid = 0.5 * (a + b);
    (window_hat(d, mid) > 0 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

inline WindowTransform make_window(int d) {
  WindowTransform w;
  w.d = d;
  w.kappa = window_hat(d, 0);
  w.firstZero = window_first_zero(d);
  w.maxRadius = w.firstZero / 4;
  w.positivityFloor = window_hat(d, 4 * w.radiusOfPositivity);  // decreasing up to the first zero
  for (int i = 0; i <= 200000; ++i) {
    const double r = 1 + i * (999.0 / 200000);
    w.c3 = std::max(w.c3, std::abs(window_hat(d, r)) * std::pow(r, 0.5 * (d + 1)));
  }
  return w;
}

}  // namespace dioex
