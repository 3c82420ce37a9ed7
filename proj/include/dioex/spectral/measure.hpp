#pragma once

#include <cmath>
#include <vector>

#include "dioex/frequencies.hpp"

namespace dioex {

struct Atom {
  std::vector<double> location;
  double weight = 0.0;
};

// Symmetrized atomic measure with atoms +-e_k and +-w_{k,i} e_k.
struct SpectralMeasure {
  Frequencies freqs;
  std::vector<Atom> atoms;
  bool symmetric = true;
  bool commensurate = false;  // flagged, not rejected

  int d() const { return freqs.d; }
};

inline SpectralMeasure make_mu(const Frequencies& f) {
  SpectralMeasure mu;
  mu.freqs = f;
  const int d = f.d;
  const double w = 1.0 / (2.0 * f.walk_dimension());
  for (int k = 0; k < d; ++k)
    for (double x : f.extended(k))
      for (double s : {1.0, -1.0}) {
        Atom a;
        a.location.assign(static_cast<std::size_t>(d), 0.0);
        a.location[static_cast<std::size_t>(k)] = s * x;
        a.weight = w;
        mu.atoms.push_back(std::move(a));
      }
  mu.commensurate = !f.pairwise_distinct();
  return mu;
}

// C(t) = sum of weight * cos(t . x).
inline double covariance(const SpectralMeasure& mu, const std::vector<double>& t) {
  require(static_cast<int>(t.size()) == mu.d(), "t must have one entry per axis");
  double c = 0;
  for (const auto& a : mu.atoms) {
    double s = 0;
    for (std::size_t k = 0; k < t.size(); ++k) s += t[k] * a.location[k];
    c += a.weight * std::cos(s);
  }
  return c;
}

struct ZFreeReport {
  bool zfree = true;
  bool symbolic = false;            // decided exactly for every |q| (no search bound)
  std::vector<std::int64_t> relation;  // (axis, q0, q1, ..., qm) of the first relation found
};

// Integer relations q0 + sum_i q_i w_{k,i} = 0 with 0 < |q|_inf <= Qmax. Relations
// decouple per axis because atoms on different axes are orthogonal.
inline ZFreeReport zfree_check(const Frequencies& f, std::int64_t Qmax) {
  require(Qmax >= 1, "Qmax must be positive");
  ZFreeReport r;
  bool all_symbolic = true;
  bool independent = true;
  for (const auto& axis : f.omega) {
    std::vector<std::uint64_t> radicands{1};
    for (const auto& w : axis) {
      if (!w.exact) {
        all_symbolic = false;
        continue;
      }
      if (std::find(radicands.begin(), radicands.end(), w.exact->radicand) != radicands.end()) independent = false;
      radicands.push_back(w.exact->radicand);
    }
  }
  // distinct square-free radicands are linearly independent over Q
  if (all_symbolic && independent) {
    r.symbolic = true;
    return r;
  }
  const int m = f.m;
  for (int k = 0; k < f.d; ++k) {
    auto ptrs = f.axis_ptrs(k);
    std::vector<std::int64_t> q(static_cast<std::size_t>(m), -Qmax);
    if (m == 0) continue;
    for (;;) {
      bool nonzero = false;
      double s = 0;
      for (int i = 0; i < m; ++i) {
        nonzero = nonzero || q[static_cast<std::size_t>(i)] != 0;
        s += static_cast<double>(q[static_cast<std::size_t>(i)]) * ptrs[static_cast<std::size_t>(i)]->approx;
      }
      const double q0 = -std::nearbyint(s);
      if (nonzero && std::abs(q0) <= static_cast<double>(Qmax) && std::abs(s + q0) < 1e-6) {
        const auto c0 = static_cast<std::int64_t>(q0);
        bool zero;
        if (auto z = exact_is_zero(c0, q, ptrs))
          zero = *z;
        else {
          LinearValue lv = eval_linear(c0, q, ptrs);
          if (boost::multiprecision::abs(lv.value) > lv.error)
            zero = false;
          else
            throw PrecisionExhausted("integer relation undecidable at the configured precision");
        }
        if (zero) {
          r.zfree = false;
          r.relation = {k + 1, c0};
          r.relation.insert(r.relation.end(), q.begin(), q.end());
          return r;
        }
      }
      int i = m - 1;
      while (i >= 0 && ++q[static_cast<std::size_t>(i)] > Qmax) q[static_cast<std::size_t>(i--)] = -Qmax;
      if (i < 0) break;
    }
  }
  return r;
}

inline ZFreeReport zfree_check(const SpectralMeasure& mu, std::int64_t Qmax) { return zfree_check(mu.freqs, Qmax); }

}  // namespace dioex
