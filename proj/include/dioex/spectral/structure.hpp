#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dioex/spectral/arcsine.hpp"
#include "dioex/spectral/measure.hpp"
#include "dioex/walk/statistics.hpp"
#include "dioex/walk/targeted.hpp"

namespace dioex {

// S(B(0, eps)) = sum_{odd n} a_n P(|U_n| <= eps), head n <= nMax from the exact walk.
// The tail uses sum_{odd n} a_n = 1/4.
inline TailedSum structure_factor_ball(const WalkConfig& cfg, double eps, int nMax, double prune = 1e-16,
                                       std::size_t memoryBudget = std::size_t{1} << 30) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(eps > 0, "eps must be positive");
  require(nMax >= 1, "nMax must be positive");
  Projector proj(*cfg.freqs);
  TailedSum t;
  double used = 0;
  evolve_visit(cfg, nMax, prune, [&](const LatticeDistribution& dist) {
    if (dist.n % 2 == 0) return;
    const double a = series_weight(dist.n);
    used += a;
    auto b = ball_masses(proj, dist, {eps}, false)[0];
    double mass = 0;
    for (double v : b.byK) mass += v;
    t.partial += a * mass;
    t.lostInflation += a * b.lost;
  }, memoryBudget);
  t.nTruncation = nMax;
  t.mode = TailMode::Crude;
  t.tailBound = std::max(0.0, 0.25 - used) + t.lostInflation;
  return t;
}

inline SeriesWeights structure_weights() {
  SeriesWeights w;
  w.log_w = log_series_weight;
  w.tail = series_weight_tail;
  w.odd_only = true;
  w.n_min = 1;
  return w;
}

// Large-scale S(B(0, eps)) from the points 0 < |U| <= eps with |q| <= Qmax; for Z-free
// frequencies U_n = 0 never happens at odd n, so these are all the atoms.
inline TargetedReport structure_factor_ball_targeted(const WalkConfig& cfg, double eps, std::int64_t Qmax,
                                                     const TargetedOptions& opt = {}) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  require(zfree_check(*cfg.freqs, 8).zfree, "targeted structure factor needs Z-free frequencies");
  return targeted_sum(cfg, eps, Qmax, structure_weights(), opt);
}

struct StructureAtom {
  std::vector<double> location;
  double weight = 0.0;
};

// Atoms of sum_{odd n <= nMax} a_n mu^{*n} inside the box [lo_k, hi_k]; lattice points
// with the same projection are merged (exact difference test).
inline std::vector<StructureAtom> structure_factor_atoms(const WalkConfig& cfg, int nMax, const std::vector<double>& lo,
                                                         const std::vector<double>& hi) {
  require(cfg.freqs.has_value(), "walk has no frequencies attached");
  const Frequencies& f = *cfg.freqs;
  const int d = f.d, M = cfg.M();
  require(static_cast<int>(lo.size()) == d && static_cast<int>(hi.size()) == d, "window needs one range per axis");
  Projector proj(f);
  std::map<LatticePoint, double> acc;
  evolve_visit(cfg, nMax, 0.0, [&](const LatticeDistribution& dist) {
    if (dist.n % 2 == 0) return;
    const double a = series_weight(dist.n);
    for (const auto& e : dist.entries) acc[e.point] += a * e.prob;
  });
  struct Item {
    LatticePoint q;
    std::vector<double> u;
    double w;
  };
  std::vector<Item> items;
  for (const auto& [q, w] : acc) {
    std::vector<double> u(static_cast<std::size_t>(d));
    bool inside = true;
    for (int k = 0; k < d; ++k) {
      u[static_cast<std::size_t>(k)] = proj.axis(q, k).value;
      inside = inside && u[static_cast<std::size_t>(k)] >= lo[static_cast<std::size_t>(k)] &&
               u[static_cast<std::size_t>(k)] <= hi[static_cast<std::size_t>(k)];
    }
    if (inside) items.push_back({q, std::move(u), w});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.u < b.u; });
  std::vector<StructureAtom> out;
  std::vector<LatticePoint> reps;
  for (const auto& it : items) {
    bool merged = false;
    // candidates with numerically close locations are merged only if U(q - q') = 0 exactly
    for (std::size_t j = out.size(); j-- > 0;) {
      if (std::abs(out[j].location[0] - it.u[0]) > 1e-9) break;
      LatticePoint diff{};
      for (int i = 0; i < M; ++i)
        diff[static_cast<std::size_t>(i)] = it.q[static_cast<std::size_t>(i)] - reps[j][static_cast<std::size_t>(i)];
      bool zero = true;
      for (int k = 0; k < d && zero; ++k) zero = proj.axis(diff, k).zero;
      if (zero) {
        out[j].weight += it.w;
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.push_back({it.u, it.w});
      reps.push_back(it.q);
    }
  }
  return out;
}

}  // namespace dioex
