#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dioex/core.hpp"

namespace dioex {

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log residuals
};

// Least squares of log(value) against log(scale).
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points, double minDecades = 1.0) {
  require(points.size() >= 3, "scaling fit needs at least 3 points");
  double smin = INFINITY, smax = 0;
  for (const auto& [s, v] : points) {
    require(s > 0 && v > 0, "scaling fit needs positive scales and values");
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  require(std::log10(smax / smin) >= minDecades - 1e-12, "scales must span the requested number of decades");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [s, v] : points) {
    const double x = std::log(s), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  ScalingFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  double rss = 0;
  for (const auto& [s, v] : points) {
    const double r = std::log(v) - (f.intercept + f.slope * std::log(s));
    rss += r * r;
  }
  f.residual = std::sqrt(rss / n);
  return f;
}

}  // namespace dioex
