#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dioex/frequencies.hpp"
#include "dioex/mcfield/field.hpp"

namespace dioex {

struct McEstimate {
  double T = 0.0;
  double u = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double stderrOfVariance = 0.0;  // jackknife over replications
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  int gridResolution = 16;
  double maxErrorBound = 0.0;  // largest per-replicate discretization bound
  bool unreliable = false;     // fewer than 30 replications
  std::vector<double> volumes;
};

struct McOptions {
  int threads = 0;  // 0: hardware concurrency
  bool keepVolumes = false;
};

namespace detail {

// Runs job(i) for i in [0, n) on a worker pool; results depend only on i.
inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& job) {
  int W = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  W = static_cast<int>(std::min<std::int64_t>(W, std::max<std::int64_t>(n, 1)));
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t i; (i = next.fetch_add(1)) < n;) job(i);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < W; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

// Sample variance of grouped data with a delete-one-group jackknife; groups are
// consecutive runs of `group` values. Sums run in index order.
inline void variance_with_jackknife(const std::vector<double>& x, std::size_t group, McEstimate& e) {
  const std::size_t n = x.size();
  double s1 = 0;
  for (double v : x) s1 += v;
  e.mean = n ? s1 / static_cast<double>(n) : 0.0;
  if (n < 2) {
    e.variance = 0;
    e.stderrOfVariance = INFINITY;
    return;
  }
  std::vector<double> y(n);
  double s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] - e.mean;
    s2 += y[i] * y[i];
  }
  e.variance = s2 / static_cast<double>(n - 1);
  const std::size_t G = n / group;
  if (G < 3 || n - group < 2) {
    e.stderrOfVariance = INFINITY;
    return;
  }
  std::vector<double> loo(G);
  double sum = 0;
  for (std::size_t gi = 0; gi < G; ++gi) {
    double a = 0, b = 0;
    for (std::size_t j = gi * group; j < (gi + 1) * group; ++j) {
      a += y[j];
      b += y[j] * y[j];
    }
    const auto m = static_cast<double>(n - group);
    loo[gi] = (s2 - b - a * a / m) / (m - 1);  // y sums to zero
    sum += loo[gi];
  }
  const double bar = sum / static_cast<double>(G);
  double ss = 0;
  for (double v : loo) ss += (v - bar) * (v - bar);
  e.stderrOfVariance = std::sqrt(ss * static_cast<double>(G - 1) / static_cast<double>(G));
}

}  // namespace detail

// Var(Leb({X > u} cap B(0, T))) over `reps` independent fields; replicate i uses the
// stream (seed, i, Field).
inline McEstimate variance_mc(const Frequencies& f, double T, std::int64_t reps, int gridResolution, std::uint64_t seed,
                              double u = 0.0, const McOptions& opt = {}) {
  require(reps >= 1, "reps must be positive");
  const auto axes = extended_axes(f);
  std::vector<double> vol(static_cast<std::size_t>(reps)), err(static_cast<std::size_t>(reps));
  detail::parallel_for(reps, opt.threads, [&](std::int64_t i) {
    Stream rng(seed, static_cast<std::uint64_t>(i), StreamTag::Field);
    auto ev = excursion_volume(sample_field(axes, rng), T, gridResolution, u);
    vol[static_cast<std::size_t>(i)] = ev.volume;
    err[static_cast<std::size_t>(i)] = ev.errorBound;
  });
  McEstimate e;
  e.T = T;
  e.u = u;
  e.reps = reps;
  e.seed = seed;
  e.gridResolution = gridResolution;
  e.unreliable = reps < 30;
  e.maxErrorBound = *std::max_element(err.begin(), err.end());
  detail::variance_with_jackknife(vol, 1, e);
  if (opt.keepVolumes) e.volumes = std::move(vol);
  return e;
}

// Law of the random frequencies of a randomized model:
//   fixed:<descriptor>  degenerate at the given frequencies (w_0 = 1)
//   uniform:a,b         w_0 = 1, w_1..w_m i.i.d. uniform on [a, b], shared by all axes
//   tuple:a,b           all (m+1) d frequencies i.i.d. uniform on [a, b]
struct FrequencyLaw {
  enum class Kind { Fixed, Uniform, Tuple };
  Kind kind = Kind::Fixed;
  std::string spec;
  Frequencies fixed;
  double lo = 0.0, hi = 0.0;

  static FrequencyLaw parse(const std::string& text) {
    FrequencyLaw law;
    law.spec = text;
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError("law must be fixed:<freqs>, uniform:a,b or tuple:a,b");
    const std::string tag = text.substr(0, colon), body = text.substr(colon + 1);
    if (tag == "fixed") {
      law.kind = Kind::Fixed;
      law.fixed = Frequencies::parse(body);
      return law;
    }
    if (tag != "uniform" && tag != "tuple") throw ParseError("unknown law '" + tag + "'");
    law.kind = tag == "uniform" ? Kind::Uniform : Kind::Tuple;
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError("interval law needs a,b");
    try {
      law.lo = std::stod(body.substr(0, comma));
      law.hi = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed interval in law '" + text + "'");
    }
    if (!(law.lo > 0 && law.hi > law.lo)) throw ParseError("law interval must satisfy 0 < a < b");
    return law;
  }

  std::vector<std::vector<double>> draw(int d, int m, Stream& rng) const {
    if (kind == Kind::Fixed) {
      if (fixed.d == 1 && d > 1) {
        auto axis = fixed.extended(0);
        return std::vector<std::vector<double>>(static_cast<std::size_t>(d), axis);
      }
      require(fixed.d == d, "fixed law has the wrong dimension");
      return extended_axes(fixed);
    }
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(m + 1)));
    if (kind == Kind::Uniform) {
      std::vector<double> shared{1.0};
      for (int i = 0; i < m; ++i) shared.push_back(lo + (hi - lo) * rng.uniform());
      for (auto& a : axes) a = shared;
    } else {
      for (auto& a : axes)
        for (double& w : a) w = lo + (hi - lo) * rng.uniform();
    }
    return axes;
  }
};

struct RandomizedEstimate {
  McEstimate total;                   // over all draws, jackknife by frequency draw
  int inner = 1;                      // fields per frequency draw
  double meanConditionalVariance = 0;  // E[Var(M | Omega)]
  double varianceOfConditionalMean = 0;  // Var(E[M | Omega]), unbiased (may be slightly negative)
  double expectedMean = 0;            // kappa_d T^d / 2 at u = 0
};

// Draws Omega from the law per replication, then `inner` fields conditionally on it.
// Inner draw j uses the stream (seed, rep, Field + j) so inner = 1 with a fixed law
// reproduces variance_mc.
inline RandomizedEstimate randomized_run(const FrequencyLaw& law, int d, int m, double T, std::int64_t reps,
                                         std::uint64_t seed, int gridResolution = 16, double u = 0.0, int inner = 2,
                                         const McOptions& opt = {}) {
  require(reps >= 1 && inner >= 1, "reps and inner must be positive");
  if (law.kind == FrequencyLaw::Kind::Fixed) m = law.fixed.m;
  const auto I = static_cast<std::size_t>(inner);
  std::vector<double> vol(static_cast<std::size_t>(reps) * I), err(vol.size());
  detail::parallel_for(reps, opt.threads, [&](std::int64_t r) {
    Stream lawRng(seed, static_cast<std::uint64_t>(r), StreamTag::Law);
    const auto axes = law.draw(d, m, lawRng);
    for (std::size_t j = 0; j < I; ++j) {
      Stream rng(seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(StreamTag::Field) + j);
      auto ev = excursion_volume(sample_field(axes, rng), T, gridResolution, u);
      vol[static_cast<std::size_t>(r) * I + j] = ev.volume;
      err[static_cast<std::size_t>(r) * I + j] = ev.errorBound;
    }
  });
  RandomizedEstimate out;
  out.inner = inner;
  auto& e = out.total;
  e.T = T;
  e.u = u;
  e.reps = reps;
  e.seed = seed;
  e.gridResolution = gridResolution;
  e.unreliable = reps < 30;
  e.maxErrorBound = *std::max_element(err.begin(), err.end());
  detail::variance_with_jackknife(vol, I, e);
  if (inner >= 2) {
    double within = 0, s1 = 0, s2 = 0;
    for (std::int64_t r = 0; r < reps; ++r) {
      double a = 0;
      for (std::size_t j = 0; j < I; ++j) a += vol[static_cast<std::size_t>(r) * I + j];
      const double gm = a / static_cast<double>(I);
      double w = 0;
      for (std::size_t j = 0; j < I; ++j) {
        const double dv = vol[static_cast<std::size_t>(r) * I + j] - gm;
        w += dv * dv;
      }
      within += w / static_cast<double>(I - 1);
      s1 += gm - e.mean;
      s2 += (gm - e.mean) * (gm - e.mean);
    }
    out.meanConditionalVariance = within / static_cast<double>(reps);
    if (reps >= 2) {
      const double R = static_cast<double>(reps);
      const double between = (s2 - s1 * s1 / R) / (R - 1);
      out.varianceOfConditionalMean = between - out.meanConditionalVariance / static_cast<double>(I);
    }
  }
  out.expectedMean = 0.5 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1) * std::pow(T, d);
  if (opt.keepVolumes) e.volumes = std::move(vol);
  return out;
}

}  // namespace dioex
