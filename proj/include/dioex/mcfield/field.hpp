#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dioex/frequencies.hpp"
#include "dioex/mcfield/rng.hpp"

namespace dioex {

// X(t) = norm * sum_k sum_i (a_ki cos(w_ki t_k) + b_ki sin(w_ki t_k)), norm = 1/sqrt(d(m+1)).
struct FieldSample {
  std::vector<std::vector<double>> freqs;  // per axis, extended tuple (w_k0 = 1 for fixed models)
  std::vector<double> coefficients;        // (a, b) for each axis-frequency pair, axis-major
  double normalization = 1.0;

  int d() const { return static_cast<int>(freqs.size()); }
  int terms() const { return static_cast<int>(freqs[0].size()); }
};

inline FieldSample make_field(std::vector<std::vector<double>> axes, std::vector<double> coefficients) {
  require(!axes.empty() && !axes[0].empty(), "field needs at least one frequency");
  for (const auto& a : axes) require(a.size() == axes[0].size(), "ragged frequency matrix");
  FieldSample s;
  s.normalization = 1.0 / std::sqrt(static_cast<double>(axes.size() * axes[0].size()));
  s.freqs = std::move(axes);
  require(coefficients.size() == 2 * s.freqs.size() * s.freqs[0].size(), "wrong number of coefficients");
  s.coefficients = std::move(coefficients);
  return s;
}

inline std::vector<std::vector<double>> extended_axes(const Frequencies& f) {
  std::vector<std::vector<double>> axes;
  for (int k = 0; k < f.d; ++k) axes.push_back(f.extended(k));
  return axes;
}

inline FieldSample sample_field(const std::vector<std::vector<double>>& axes, Stream& rng) {
  std::vector<double> c(2 * axes.size() * axes.at(0).size());
  for (double& x : c) x = rng.normal();
  return make_field(axes, std::move(c));
}

inline FieldSample sample_field(const Frequencies& f, std::uint64_t seed, std::uint64_t index = 0) {
  Stream rng(seed, index, StreamTag::Field);
  return sample_field(extended_axes(f), rng);
}

// Contribution of axis k at coordinate x.
inline double axis_term(const FieldSample& s, int k, double x) {
  const auto& w = s.freqs[static_cast<std::size_t>(k)];
  const std::size_t base = 2 * static_cast<std::size_t>(k) * w.size();
  double v = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    v += s.coefficients[base + 2 * i] * std::cos(w[i] * x) + s.coefficients[base + 2 * i + 1] * std::sin(w[i] * x);
  return v * s.normalization;
}

inline double field_eval(const FieldSample& s, const std::vector<double>& t) {
  require(static_cast<int>(t.size()) == s.d(), "t must have one entry per axis");
  double v = 0;
  for (int k = 0; k < s.d(); ++k) v += axis_term(s, k, t[static_cast<std::size_t>(k)]);
  return v;
}

struct ExcursionVolume {
  double volume = 0.0;
  double errorBound = 0.0;  // h^d * (cells cut by the sphere + cells next to a level crossing)
  double h = 0.0;
};

// Midpoint rule for Leb({X > u} cap B(0, T)) on a Cartesian grid of step h <= 1/gridResolution.
inline ExcursionVolume excursion_volume(const FieldSample& s, double T, int gridResolution, double u = 0.0) {
  require(T > 0, "T must be positive");
  require(gridResolution >= 8, "grid resolution must be at least 8 points per unit length");
  const int d = s.d();
  const auto N = static_cast<std::int64_t>(std::ceil(2 * T * gridResolution));
  double cells = 1;
  for (int k = 0; k < d; ++k) cells *= static_cast<double>(N);
  require(cells <= 4e9, "grid too large");
  const double h = 2 * T / static_cast<double>(N);
  std::vector<double> center(static_cast<std::size_t>(N));
  for (std::int64_t j = 0; j < N; ++j) center[static_cast<std::size_t>(j)] = -T + (static_cast<double>(j) + 0.5) * h;
  // the field is a sum of one-dimensional terms, tabulated per axis
  std::vector<std::vector<double>> g(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(N)));
  for (int k = 0; k < d; ++k)
    for (std::int64_t j = 0; j < N; ++j)
      g[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = axis_term(s, k, center[static_cast<std::size_t>(j)]);

  const double T2 = T * T, shell = 0.5 * h * std::sqrt(static_cast<double>(d));
  const double rIn = std::max(0.0, T - shell), rOut = T + shell;
  std::int64_t inside = 0, uncertain = 0;
  // state per cell: 0 outside the ball, 1 inside and below the level, 2 inside and above
  const auto total = static_cast<std::size_t>(cells);
  std::vector<std::uint8_t> state(total);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t c = 0; c < total; ++c) {
    double x = 0, r2 = 0;
    for (int k = 0; k < d; ++k) {
      const auto j = static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
      x += g[static_cast<std::size_t>(k)][j];
      r2 += center[j] * center[j];
    }
    if (r2 <= T2) {
      const bool above = x > u;
      state[c] = above ? 2 : 1;
      inside += above;
    }
    if (r2 >= rIn * rIn && r2 <= rOut * rOut) ++uncertain;
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < N) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  // level crossings between neighbouring cells inside the ball
  std::size_t stride = 1;
  for (int k = d - 1; k >= 0; --k) {
    for (std::size_t c = 0; c < total; ++c) {
      if ((c / stride) % static_cast<std::size_t>(N) == static_cast<std::size_t>(N - 1)) continue;
      const std::uint8_t a = state[c], b = state[c + stride];
      if (a && b && a != b) uncertain += 2;
    }
    stride *= static_cast<std::size_t>(N);
  }
  ExcursionVolume r;
  r.h = h;
  const double cell = std::pow(h, d);
  r.volume = static_cast<double>(inside) * cell;
  r.errorBound = static_cast<double>(uncertain) * cell;
  return r;
}

}  // namespace dioex
