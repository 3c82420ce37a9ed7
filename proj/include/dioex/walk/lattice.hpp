#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dioex/frequencies.hpp"

namespace dioex {

inline constexpr int kMaxWalkDim = 12;
using LatticePoint = std::array<std::int32_t, kMaxWalkDim>;  // unused coordinates stay 0

inline LatticePoint make_point(std::initializer_list<std::int32_t> xs) {
  LatticePoint p{};
  std::size_t i = 0;
  for (auto x : xs) p[i++] = x;
  return p;
}

inline std::int64_t l1_norm(const LatticePoint& p, int M) {
  std::int64_t s = 0;
  for (int j = 0; j < M; ++j) s += std::abs(p[static_cast<std::size_t>(j)]);
  return s;
}

inline double l2_norm_sq(const LatticePoint& p, int M) {
  double s = 0;
  for (int j = 0; j < M; ++j) s += double(p[static_cast<std::size_t>(j)]) * p[static_cast<std::size_t>(j)];
  return s;
}

inline int point_parity(const LatticePoint& p, int M) {
  std::int64_t s = 0;
  for (int j = 0; j < M; ++j) s += p[static_cast<std::size_t>(j)];
  return static_cast<int>(((s % 2) + 2) % 2);
}

// Step law P(S_{n+1} = S_n +- e_j) = theta_j / 2 on Z^M. Coordinates are grouped
// per axis: index k(m+1) + i, with i = 0 the unit base frequency.
struct WalkConfig {
  std::optional<Frequencies> freqs;
  std::vector<double> theta;

  int M() const { return static_cast<int>(theta.size()); }
  bool uniform() const {
    return std::all_of(theta.begin(), theta.end(), [&](double t) { return t == theta[0]; });
  }

  static WalkConfig lattice(int M) {
    require(M >= 1 && M <= kMaxWalkDim, "walk dimension out of range");
    WalkConfig c;
    c.theta.assign(static_cast<std::size_t>(M), 1.0 / M);
    return c;
  }

  static WalkConfig uniform_for(const Frequencies& f) {
    WalkConfig c = lattice(f.walk_dimension());
    c.freqs = f;
    return c;
  }

  static WalkConfig weighted(const Frequencies& f, std::vector<double> theta) {
    require(static_cast<int>(theta.size()) == f.walk_dimension(), "one weight per walk coordinate");
    WalkConfig c;
    c.freqs = f;
    c.theta = std::move(theta);
    c.validate();
    return c;
  }

  void validate() const {
    require(M() >= 1 && M() <= kMaxWalkDim, "walk dimension out of range");
    double s = 0;
    for (double t : theta) {
      require(t > 0 && t <= 1, "weights must lie in (0, 1]");
      s += t;
    }
    require(std::abs(s - 1) <= 4 * M() * 1e-16, "weights must sum to 1");
  }
};

struct LatticeEntry {
  LatticePoint point;
  double prob;
};

// Distribution of S_n: sorted entries plus the probability pruned so far.
struct LatticeDistribution {
  int n = 0;
  int M = 1;
  std::vector<LatticeEntry> entries;
  double lostMass = 0.0;

  int parity() const { return n % 2; }

  double mass() const {
    double s = 0, c = 0;  // Neumaier summation
    for (const auto& e : entries) {
      const double t = s + e.prob;
      c += std::abs(s) >= e.prob ? (s - t) + e.prob : (e.prob - t) + s;
      s = t;
    }
    return s + c;
  }

  double probability(const LatticePoint& p) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), p,
                               [](const LatticeEntry& e, const LatticePoint& q) { return e.point < q; });
    return (it != entries.end() && it->point == p) ? it->prob : 0.0;
  }
};

// Evolves S_n one step at a time. Dense bounding-box scatter when the box is
// small relative to memory; sort-merge of contributions otherwise.
class Evolver {
 public:
  Evolver(WalkConfig cfg, double pruneThreshold, std::size_t memoryBudgetBytes = std::size_t{1} << 30)
      : cfg_(std::move(cfg)), prune_(pruneThreshold), budget_(memoryBudgetBytes) {
    cfg_.validate();
    require(prune_ >= 0 && prune_ <= 1e-6, "prune threshold must lie in [0, 1e-6]");
    dist_.M = cfg_.M();
    dist_.entries.push_back({LatticePoint{}, 1.0});
    lo_.fill(0);
    hi_.fill(0);
  }

  const LatticeDistribution& current() const { return dist_; }
  const WalkConfig& config() const { return cfg_; }

  void step() {
    const int M = cfg_.M();
    std::array<std::int64_t, kMaxWalkDim> width{};
    double volume = 1;
    for (int j = 0; j < M; ++j) {
      width[static_cast<std::size_t>(j)] = hi_[static_cast<std::size_t>(j)] - lo_[static_cast<std::size_t>(j)] + 3;
      volume *= static_cast<double>(width[static_cast<std::size_t>(j)]);
    }
    const double contributions = 2.0 * M * static_cast<double>(dist_.entries.size());
    const bool dense = volume * sizeof(double) <= std::max(8.0 * contributions * sizeof(double), 64.0 * (1 << 20));
    const double need = dense ? volume * sizeof(double) + contributions * sizeof(LatticeEntry) / (2.0 * M)
                              : contributions * sizeof(LatticeEntry) * 2;
    if (need > static_cast<double>(budget_))
      throw MemoryBudgetExceeded("lattice distribution at n = " + std::to_string(dist_.n + 1) +
                                 " needs ~" + std::to_string(static_cast<long long>(need / (1 << 20))) +
                                 " MiB; raise the prune threshold (e.g. 1e-14) or lower nMax");
    if (dense)
      step_dense(width);
    else
      step_sparse();
    ++dist_.n;
  }

 private:
  void finish(std::vector<LatticeEntry>& next, double lost) {
    const int M = cfg_.M();
    dist_.lostMass += lost;
    dist_.entries = std::move(next);
    if (dist_.entries.empty()) return;
    lo_ = dist_.entries.front().point;
    hi_ = lo_;
    for (const auto& e : dist_.entries)
      for (int j = 0; j < M; ++j) {
        auto jj = static_cast<std::size_t>(j);
        lo_[jj] = std::min(lo_[jj], e.point[jj]);
        hi_[jj] = std::max(hi_[jj], e.point[jj]);
      }
  }

  void step_dense(const std::array<std::int64_t, kMaxWalkDim>& width) {
    const int M = cfg_.M();
    std::array<std::int64_t, kMaxWalkDim> stride{};
    std::int64_t total = 1;
    for (int j = M - 1; j >= 0; --j) {
      stride[static_cast<std::size_t>(j)] = total;
      total *= width[static_cast<std::size_t>(j)];
    }
    buffer_.assign(static_cast<std::size_t>(total), 0.0);
    std::array<std::int32_t, kMaxWalkDim> origin{};
    for (int j = 0; j < M; ++j) origin[static_cast<std::size_t>(j)] = lo_[static_cast<std::size_t>(j)] - 1;
    std::vector<double> half(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) half[static_cast<std::size_t>(j)] = cfg_.theta[static_cast<std::size_t>(j)] / 2;
    for (const auto& e : dist_.entries) {
      std::int64_t idx = 0;
      for (int j = 0; j < M; ++j)
        idx += (e.point[static_cast<std::size_t>(j)] - origin[static_cast<std::size_t>(j)]) * stride[static_cast<std::size_t>(j)];
      for (int j = 0; j < M; ++j) {
        const double v = e.prob * half[static_cast<std::size_t>(j)];
        buffer_[static_cast<std::size_t>(idx + stride[static_cast<std::size_t>(j)])] += v;
        buffer_[static_cast<std::size_t>(idx - stride[static_cast<std::size_t>(j)])] += v;
      }
    }
    std::vector<LatticeEntry> next;
    next.reserve(dist_.entries.size() + dist_.entries.size() / 4 + 16);
    double lost = 0;
    LatticePoint pt{};
    for (int j = 0; j < M; ++j) pt[static_cast<std::size_t>(j)] = origin[static_cast<std::size_t>(j)];
    const auto last = static_cast<std::size_t>(M - 1);
    for (std::int64_t i = 0; i < total; ++i) {
      const double v = buffer_[static_cast<std::size_t>(i)];
      if (v > 0) {
        if (v > prune_)
          next.push_back({pt, v});
        else
          lost += v;
      }
      // odometer increment, last coordinate fastest
      std::size_t j = last;
      while (++pt[j] >= origin[j] + width[j]) {
        pt[j] = origin[j];
        if (j == 0) break;
        --j;
      }
    }
    finish(next, lost);
  }

  void step_sparse() {
    const int M = cfg_.M();
    std::vector<LatticeEntry> contrib;
    contrib.reserve(dist_.entries.size() * 2 * static_cast<std::size_t>(M));
    for (const auto& e : dist_.entries)
      for (int j = 0; j < M; ++j) {
        const double v = e.prob * cfg_.theta[static_cast<std::size_t>(j)] / 2;
        LatticeEntry a{e.point, v};
        ++a.point[static_cast<std::size_t>(j)];
        contrib.push_back(a);
        a.point[static_cast<std::size_t>(j)] -= 2;
        contrib.push_back(a);
      }
    std::stable_sort(contrib.begin(), contrib.end(),
                     [](const LatticeEntry& a, const LatticeEntry& b) { return a.point < b.point; });
    std::vector<LatticeEntry> next;
    double lost = 0;
    for (std::size_t i = 0; i < contrib.size();) {
      std::size_t k = i;
      double s = 0;
      while (k < contrib.size() && contrib[k].point == contrib[i].point) s += contrib[k++].prob;
      if (s > prune_)
        next.push_back({contrib[i].point, s});
      else
        lost += s;
      i = k;
    }
    finish(next, lost);
  }

  WalkConfig cfg_;
  double prune_;
  std::size_t budget_;
  LatticeDistribution dist_;
  LatticePoint lo_{}, hi_{};
  std::vector<double> buffer_;
};

// Calls visit(dist) for n = 0..nMax.
template <class Visitor>
void evolve_visit(const WalkConfig& cfg, int nMax, double pruneThreshold, Visitor&& visit,
                  std::size_t memoryBudgetBytes = std::size_t{1} << 30) {
  require(nMax >= 0, "nMax must be nonnegative");
  Evolver ev(cfg, pruneThreshold, memoryBudgetBytes);
  visit(ev.current());
  for (int n = 1; n <= nMax; ++n) {
    ev.step();
    visit(ev.current());
  }
}

inline std::vector<LatticeDistribution> evolve(const WalkConfig& cfg, int nMax, double pruneThreshold,
                                               std::size_t memoryBudgetBytes = std::size_t{1} << 30) {
  std::vector<LatticeDistribution> out;
  evolve_visit(cfg, nMax, pruneThreshold, [&](const LatticeDistribution& d) { out.push_back(d); },
               memoryBudgetBytes);
  return out;
}

}  // namespace dioex
