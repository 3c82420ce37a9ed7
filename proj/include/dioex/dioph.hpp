#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dioex/frequencies.hpp"

namespace dioex {

using IntVec = std::vector<std::int64_t>;

struct Convergent {
  BigInt p;
  BigInt q;
};

// Continued-fraction convergents. Rational inputs terminate exactly; irrational
// ones run on the tracked interval [value - error, value + error].
inline std::vector<Convergent> cf_convergents(const Frequency& x, int count,
                                              std::optional<BigInt> q_limit = std::nullopt) {
  require(count >= 1, "count must be positive");
  std::vector<Convergent> out;
  BigInt p_prev = 1, q_prev = 0, p_prev2 = 0, q_prev2 = 1;
  auto push = [&](const BigInt& a) {
    BigInt p = a * p_prev + p_prev2;
    BigInt q = a * q_prev + q_prev2;
    p_prev2 = p_prev;
    q_prev2 = q_prev;
    p_prev = p;
    q_prev = q;
    if (q_limit && q > *q_limit) return false;
    out.push_back({p, q});
    return true;
  };

  if (x.is_rational()) {
    BigInt num = boost::multiprecision::numerator(x.rational());
    BigInt den = boost::multiprecision::denominator(x.rational());
    while (den != 0 && static_cast<int>(out.size()) < count) {
      BigInt a = num / den;
      if (!push(a)) break;
      BigInt r = num - a * den;
      num = den;
      den = r;
    }
    return out;
  }

  const HighReal slack = boost::multiprecision::ldexp(HighReal(1), -500);
  HighReal lo = x.value - x.error;
  HighReal hi = x.value + x.error;
  while (static_cast<int>(out.size()) < count) {
    HighReal alo = boost::multiprecision::floor(lo);
    HighReal ahi = boost::multiprecision::floor(hi);
    if (alo != ahi || lo - alo <= 0)
      throw PrecisionExhausted("precision exhausted after " + std::to_string(out.size()) +
                               " convergents of " + x.descriptor);
    if (!push(BigInt(alo.convert_to<BigInt>()))) break;
    HighReal nlo = 1 / (hi - alo);
    HighReal nhi = 1 / (lo - alo);
    lo = nlo * (1 - slack);
    hi = nhi * (1 + slack);
  }
  return out;
}

struct DeltaResult {
  double delta = 0.0;
  std::int64_t p = 0;
  HighReal value;  // delta at working precision
  HighReal error;  // bound on |value - true delta|
  bool exact = false;
};

namespace detail {

inline bool all_rational(std::span<const Frequency> omega, std::span<const std::int64_t> q) {
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] != 0 && !omega[i].is_rational()) return false;
  return true;
}

inline DeltaResult delta_exact_rational(std::span<const Frequency> omega,
                                        std::span<const std::int64_t> q) {
  Rational x = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] != 0) x += Rational(q[i]) * omega[i].rational();
  // nearest integer; at an exact half pick the smaller p
  Rational shifted = x - Rational(1, 2);
  BigInt fl = boost::multiprecision::numerator(shifted) / boost::multiprecision::denominator(shifted);
  if (Rational(fl) > shifted) fl -= 1;  // floor
  BigInt p = (Rational(fl) == shifted) ? fl : fl + 1;  // ceil(x - 1/2)
  Rational delta = x - Rational(p);
  if (delta < 0) delta = -delta;
  DeltaResult r;
  r.value = to_high(delta);
  r.error = 0;
  r.delta = to_double(r.value);
  r.p = p.convert_to<std::int64_t>();
  r.exact = true;
  return r;
}

}  // namespace detail

// min_p |p - q.omega| and the minimizing p.
inline DeltaResult delta_q(std::span<const Frequency> omega, std::span<const std::int64_t> q) {
  require(omega.size() == q.size(), "omega and q must have equal length");
  require(std::any_of(q.begin(), q.end(), [](std::int64_t v) { return v != 0; }), "q must be nonzero");
  if (detail::all_rational(omega, q)) return detail::delta_exact_rational(omega, q);

  // double-double accumulation of q.omega (error-free products and sums)
  double hi = 0, lo = 0, scale = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = static_cast<double>(q[i]);
    const double prod = qi * omega[i].approx;
    const double prod_err = std::fma(qi, omega[i].approx, -prod);
    const double s = hi + prod;
    const double bb = s - hi;
    const double sum_err = (hi - (s - bb)) + (prod - bb);
    hi = s;
    lo += sum_err + prod_err + qi * omega[i].approx_lo;
    scale += std::abs(prod);
  }
  const double err_d = static_cast<double>(q.size() + 1) * scale * 0x1p-100;
  double p_d = std::nearbyint(hi);
  double dd = std::abs((hi - p_d) + lo);
  if (dd > 2 * err_d && 0.5 - dd > 2 * err_d && std::abs(p_d) < 0x1p52 && scale < 0x1p40) {
    DeltaResult r;
    r.delta = dd;
    r.p = static_cast<std::int64_t>(p_d);
    r.value = HighReal(hi - p_d) + HighReal(lo);
    if (r.value < 0) r.value = -r.value;
    r.error = HighReal(err_d);
    return r;
  }

  std::vector<const Frequency*> ptrs;
  for (const auto& f : omega) ptrs.push_back(&f);
  LinearValue lv = eval_linear(0, q, ptrs);
  HighReal p_h = boost::multiprecision::round(lv.value);
  HighReal dh = boost::multiprecision::abs(lv.value - p_h);
  DeltaResult r;
  if (dh <= lv.error) {
    auto zero = exact_is_zero(-p_h.convert_to<std::int64_t>(), q, ptrs);
    if (!zero)
      throw PrecisionExhausted("cannot certify delta_q != 0 at the configured precision");
    if (*zero) {
      r.exact = true;
      r.value = 0;
      r.error = 0;
      r.delta = 0;
      r.p = p_h.convert_to<std::int64_t>();
      return r;
    }
    throw PrecisionExhausted("delta_q below tracked error; raise precision");
  }
  if (boost::multiprecision::abs(dh - HighReal(0.5)) <= lv.error)
    throw PrecisionExhausted("delta_q within tracked error of 1/2");
  r.value = dh;
  r.error = lv.error;
  r.delta = to_double(dh);
  r.p = p_h.convert_to<std::int64_t>();
  return r;
}

inline DeltaResult delta_q(std::span<const Frequency> omega, std::int64_t q) {
  std::int64_t qq[1] = {q};
  return delta_q(omega.subspan(0, 1), std::span<const std::int64_t>(qq, 1));
}

namespace detail {

inline double norm2(std::span<const std::int64_t> q) {
  double s = 0;
  for (auto v : q) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

inline std::int64_t norm_inf(std::span<const std::int64_t> q) {
  std::int64_t s = 0;
  for (auto v : q) s = std::max<std::int64_t>(s, v < 0 ? -v : v);
  return s;
}

// First nonzero coordinate positive: one representative per +-q pair.
inline bool half_space(std::span<const std::int64_t> q) {
  for (auto v : q)
    if (v != 0) return v > 0;
  return false;
}

// Visits every q in [-R, R]^m with half_space(q) true.
template <class F>
void for_each_in_box(int m, std::int64_t R, F&& f) {
  IntVec q(static_cast<std::size_t>(m), -R);
  if (m == 0) return;
  for (;;) {
    if (half_space(q)) f(std::span<const std::int64_t>(q));
    int i = m - 1;
    while (i >= 0 && q[static_cast<std::size_t>(i)] == R) q[static_cast<std::size_t>(i--)] = -R;
    if (i < 0) break;
    ++q[static_cast<std::size_t>(i)];
  }
}

}  // namespace detail

struct DirichletResult {
  IntVec q;
  std::int64_t p = 0;
  double delta = 0.0;
  double bound = 0.0;   // N^{-m}
  double c_m = 1.0;     // Euclidean-form constant: delta <= c_m |q|^{-m}
};

// Best delta over 0 < |q|_inf <= N for N = 1..Nmax, from a single scan.
inline std::vector<DirichletResult> dirichlet_profile(std::span<const Frequency> omega,
                                                      std::int64_t Nmax) {
  require(Nmax >= 1, "N must be >= 1");
  const int m = static_cast<int>(omega.size());
  require(m >= 1, "omega must be nonempty");
  std::vector<DirichletResult> shell(static_cast<std::size_t>(Nmax + 1));
  for (auto& s : shell) s.delta = std::numeric_limits<double>::infinity();
  detail::for_each_in_box(m, Nmax, [&](std::span<const std::int64_t> q) {
    auto s = static_cast<std::size_t>(detail::norm_inf(q));
    DeltaResult d = delta_q(omega, q);
    if (d.delta < shell[s].delta) {
      shell[s].delta = d.delta;
      shell[s].q.assign(q.begin(), q.end());
      shell[s].p = d.p;
    }
  });
  std::vector<DirichletResult> out;
  DirichletResult best;
  best.delta = std::numeric_limits<double>::infinity();
  const double cm = std::pow(static_cast<double>(m), 0.5 * m);
  for (std::int64_t N = 1; N <= Nmax; ++N) {
    if (shell[static_cast<std::size_t>(N)].delta < best.delta) best = shell[static_cast<std::size_t>(N)];
    DirichletResult r = best;
    r.bound = std::pow(static_cast<double>(N), -m);
    r.c_m = cm;
    out.push_back(r);
  }
  return out;
}

inline DirichletResult dirichlet_best(std::span<const Frequency> omega, std::int64_t N) {
  return dirichlet_profile(omega, N).back();
}

// psi(q) = c q^{-tau} ln(1+q)^p.
class RegularPsi {
 public:
  double tau = 1.0;
  double c = 1.0;
  double p = 0.0;
  std::uint64_t q0 = 1;  // psi <= 1 and strictly decreasing for q >= q0

  RegularPsi() { q0 = compute_q0(); }
  RegularPsi(double tau_, double c_, double p_ = 0.0) : tau(tau_), c(c_), p(p_) {
    require(tau > 0, "tau must be positive");
    require(c > 0, "c must be positive");
    q0 = compute_q0();
  }

  double operator()(double q) const {
    double v = c / std::pow(q, tau);
    if (p != 0.0) v *= std::pow(std::log1p(q), p);
    return v;
  }

  // min{q >= 1 : psi(q) <= eps}
  std::uint64_t inverse(double eps) const {
    require(eps > 0, "eps must be positive");
    const std::uint64_t linear_cap = std::min<std::uint64_t>(q0, 1'000'000);
    for (std::uint64_t q = 1; q <= linear_cap; ++q)
      if ((*this)(static_cast<double>(q)) <= eps) return q;
    std::uint64_t lo = std::max<std::uint64_t>(q0, 1);
    std::uint64_t hi = lo;
    while ((*this)(static_cast<double>(hi)) > eps) {
      lo = hi;
      require(hi < (std::uint64_t{1} << 61), "psi never reaches eps");
      hi *= 2;
    }
    while (hi - lo > 1) {
      std::uint64_t mid = lo + (hi - lo) / 2;
      if ((*this)(static_cast<double>(mid)) <= eps)
        hi = mid;
      else
        lo = mid;
    }
    return (*this)(static_cast<double>(lo)) <= eps ? lo : hi;
  }

 private:
  std::uint64_t compute_q0() const {
    std::uint64_t q = 1;
    if (p > 0) {
      auto g = [&](double x) { return tau * (1 + x) * std::log1p(x) - p * x; };
      auto dg = [&](double x) { return tau * (std::log1p(x) + 1) - p; };
      while (!(g(static_cast<double>(q)) > 0 && dg(static_cast<double>(q)) > 0)) q *= 2;
      std::uint64_t lo = q / 2;
      while (lo + 1 < q) {
        std::uint64_t mid = lo + (q - lo) / 2;
        if (g(static_cast<double>(mid)) > 0 && dg(static_cast<double>(mid)) > 0)
          q = mid;
        else
          lo = mid;
      }
    }
    if ((*this)(static_cast<double>(q)) > 1) {
      std::uint64_t lo = q, hi = q;
      while ((*this)(static_cast<double>(hi)) > 1) {
        lo = hi;
        require(hi < (std::uint64_t{1} << 61), "psi never drops below 1");
        hi *= 2;
      }
      while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if ((*this)(static_cast<double>(mid)) <= 1)
          hi = mid;
        else
          lo = mid;
      }
      q = hi;
    }
    return q;
  }
};

inline std::uint64_t psi_inverse(const RegularPsi& psi, double eps) { return psi.inverse(eps); }

struct ApproxElement {
  IntVec q;
  std::int64_t p = 0;
  double delta = 0.0;
  double norm = 0.0;
};

struct ApproxSet {
  double epsilon = 0.0;
  std::vector<ApproxElement> elements;
  std::int64_t searchRadius = 0;
  // Filled when a psi certificate is attached.
  std::optional<std::uint64_t> psi_inverse_eps;
  bool complete_for_psi = true;
  bool separation_checked = false;
  bool separation_holds = true;
  double min_gap = std::numeric_limits<double>::infinity();
};

// {q : 0 < delta_q <= eps, |q| <= Qmax}, one representative per +-q, sorted by |q|.
inline ApproxSet i_eps_set(std::span<const Frequency> omega, double eps, std::int64_t Qmax,
                           const RegularPsi* certificate = nullptr) {
  require(eps > 0 && eps < 0.5, "eps must lie in (0, 1/2)");
  require(Qmax >= 1, "Qmax must be positive");
  const int m = static_cast<int>(omega.size());
  ApproxSet set;
  set.epsilon = eps;
  set.searchRadius = Qmax;
  const double r2max = static_cast<double>(Qmax) * static_cast<double>(Qmax);
  auto visit = [&](std::span<const std::int64_t> q) {
    double n = detail::norm2(q);
    if (n * n > r2max) return;
    DeltaResult d = delta_q(omega, q);
    if (d.delta > 0 && d.delta <= eps && !d.exact)
      set.elements.push_back({IntVec(q.begin(), q.end()), d.p, d.delta, n});
    else if (d.exact && d.value > 0 && d.value <= HighReal(eps))
      set.elements.push_back({IntVec(q.begin(), q.end()), d.p, d.delta, n});
  };
  if (m == 1) {
    for (std::int64_t q = 1; q <= Qmax; ++q) visit(std::span<const std::int64_t>(&q, 1));
  } else {
    detail::for_each_in_box(m, Qmax, visit);
  }
  std::stable_sort(set.elements.begin(), set.elements.end(),
                   [](const ApproxElement& a, const ApproxElement& b) {
                     if (a.norm != b.norm) return a.norm < b.norm;
                     return a.q < b.q;
                   });
  if (certificate) {
    set.psi_inverse_eps = certificate->inverse(eps);
    set.complete_for_psi = static_cast<std::uint64_t>(Qmax) >= *set.psi_inverse_eps;
    set.separation_checked = true;
    const auto& el = set.elements;
    for (std::size_t i = 0; i < el.size(); ++i)
      for (std::size_t j = i + 1; j < el.size(); ++j) {
        double sd = 0, ss = 0;
        for (std::size_t k = 0; k < el[i].q.size(); ++k) {
          double a = static_cast<double>(el[i].q[k]), b = static_cast<double>(el[j].q[k]);
          sd += (a - b) * (a - b);
          ss += (a + b) * (a + b);
        }
        set.min_gap = std::min(set.min_gap, std::sqrt(std::min(sd, ss)));
      }
    set.separation_holds = set.min_gap >= static_cast<double>(*set.psi_inverse_eps);
  }
  return set;
}

struct BaCertificate {
  bool holds = true;
  double worstRatio = std::numeric_limits<double>::infinity();
  IntVec worstQ;
  std::uint64_t q0 = 1;
  std::int64_t qmax = 0;
  std::uint64_t scanned = 0;
  bool emptyRange = false;
};

// delta_q >= 2 psi(|q|) for q0 <= |q| <= Qmax.
inline BaCertificate ba_certificate(std::span<const Frequency> omega, const RegularPsi& psi,
                                    std::int64_t Qmax) {
  require(Qmax >= 2, "Qmax must be >= 2");
  BaCertificate cert;
  cert.q0 = psi.q0;
  cert.qmax = Qmax;
  const int m = static_cast<int>(omega.size());
  auto visit = [&](std::span<const std::int64_t> q) {
    double n = detail::norm2(q);
    if (n > static_cast<double>(Qmax) || n < static_cast<double>(psi.q0)) return;
    ++cert.scanned;
    DeltaResult d = delta_q(omega, q);
    double ratio = d.delta / (2 * psi(n));
    if (ratio < cert.worstRatio) {
      cert.worstRatio = ratio;
      cert.worstQ.assign(q.begin(), q.end());
    }
  };
  if (m == 1) {
    for (std::int64_t q = 1; q <= Qmax; ++q) visit(std::span<const std::int64_t>(&q, 1));
  } else {
    detail::for_each_in_box(m, Qmax, visit);
  }
  cert.emptyRange = cert.scanned == 0;
  cert.holds = cert.emptyRange || cert.worstRatio >= 1.0;
  return cert;
}

struct Witness {
  IntVec p;                   // one entry per axis (length 1 for the scalar case)
  IntVec q;                   // common q
  std::vector<IntVec> q_axes;  // per-axis q after tensorization; empty for scalar witnesses
  std::vector<double> err;
  int parity = 0;
  int shift_index = 0;  // 1-based index i* of the shifted tuple omega - e_{i*}; 0 if none
};

inline int coordinate_parity(const Witness& w) {
  std::int64_t s = 0;
  for (auto v : w.p) s += v;
  if (w.q_axes.empty()) {
    for (auto v : w.q) s += v;
  } else {
    for (const auto& qa : w.q_axes)
      for (auto v : qa) s += v;
  }
  return static_cast<int>(((s % 2) + 2) % 2);
}

struct WitnessReport {
  std::vector<Witness> witnesses;
  int shift_index = 0;  // nonzero when the odd-parity witnesses certify omega - e_{shift_index}
  bool parity_fixed = false;
};

// 2-adic reduction of even-parity witnesses: divide (p, q) by the largest common
// power of two; if the reduced tuple is still even, shift omega by -e_{i*} with
// q~_{i*} odd so that p' = p~ - q~_{i*} has odd total parity.
inline WitnessReport parity_fix(std::span<const Witness> even) {
  WitnessReport rep;
  rep.parity_fixed = true;
  std::vector<Witness> reduced;
  std::map<int, int> index_count;
  for (const Witness& w : even) {
    Witness r = w;
    auto all_even = [&]() {
      if (r.p[0] % 2 != 0) return false;
      for (auto v : r.q)
        if (v % 2 != 0) return false;
      return true;
    };
    double scale = 1;
    while (all_even() && (r.p[0] != 0 || std::any_of(r.q.begin(), r.q.end(), [](auto v) { return v != 0; }))) {
      r.p[0] /= 2;
      for (auto& v : r.q) v /= 2;
      scale *= 2;
    }
    for (auto& e : r.err) e /= scale;
    r.parity = coordinate_parity(r);
    if (r.parity == 0) {
      for (std::size_t i = 0; i < r.q.size(); ++i)
        if (r.q[i] % 2 != 0) {
          r.shift_index = static_cast<int>(i) + 1;
          break;
        }
      ++index_count[r.shift_index];
    }
    reduced.push_back(r);
  }
  int best = 0, best_count = -1;
  for (auto [idx, cnt] : index_count)
    if (cnt > best_count) {
      best = idx;
      best_count = cnt;
    }
  rep.shift_index = best;
  for (Witness r : reduced) {
    if (r.parity == 1 && best == 0) {
      rep.witnesses.push_back(r);
      continue;
    }
    if (best == 0) continue;
    std::int64_t qi = r.q[static_cast<std::size_t>(best - 1)];
    if (r.parity == 0 && qi % 2 != 0) {
      r.p[0] -= qi;
      r.shift_index = best;
      r.parity = coordinate_parity(r);
      rep.witnesses.push_back(r);
    }
  }
  return rep;
}

// Witnesses |p - omega.q| <= c_W psi(|q|), odd parity first.
inline WitnessReport wa_witnesses(std::span<const Frequency> omega, const RegularPsi& psi,
                                  double c_W, int count, std::int64_t Qmax) {
  require(count >= 1, "count must be >= 1");
  require(c_W > 0, "c_W must be positive");
  const int m = static_cast<int>(omega.size());
  std::vector<Witness> odd, even;
  auto consider = [&](std::span<const std::int64_t> q) {
    DeltaResult d = delta_q(omega, q);
    double n = detail::norm2(q);
    if (d.delta <= c_W * psi(n)) {
      Witness w;
      w.p = {d.p};
      w.q.assign(q.begin(), q.end());
      w.err = {d.delta};
      w.parity = coordinate_parity(w);
      (w.parity ? odd : even).push_back(w);
    }
  };
  if (m == 1) {
    auto conv = cf_convergents(omega[0], 4096, BigInt(Qmax));
    for (const auto& c : conv) {
      if (c.q < 1) continue;
      std::int64_t q = c.q.convert_to<std::int64_t>();
      consider(std::span<const std::int64_t>(&q, 1));
    }
  } else {
    std::vector<IntVec> shell;
    detail::for_each_in_box(m, Qmax, [&](std::span<const std::int64_t> q) {
      if (detail::norm2(q) <= static_cast<double>(Qmax)) shell.emplace_back(q.begin(), q.end());
    });
    std::stable_sort(shell.begin(), shell.end(), [](const IntVec& a, const IntVec& b) {
      return detail::norm2(a) < detail::norm2(b);
    });
    for (const auto& q : shell) consider(q);
  }
  WitnessReport rep;
  if (odd.empty() && !even.empty()) {
    rep = parity_fix(even);
    if (static_cast<int>(rep.witnesses.size()) > count) rep.witnesses.resize(static_cast<std::size_t>(count));
    return rep;
  }
  for (auto& w : odd)
    if (static_cast<int>(rep.witnesses.size()) < count) rep.witnesses.push_back(w);
  for (auto& w : even)
    if (static_cast<int>(rep.witnesses.size()) < count) rep.witnesses.push_back(w);
  return rep;
}

// d-axis witness from an odd scalar witness; for even d axis 1 takes (2p, 2q).
inline Witness swa_star_tensorize(const Witness& w, int d) {
  require(d >= 1, "d must be positive");
  require(w.p.size() == 1 && w.q_axes.empty(), "scalar witness expected");
  Witness s = w;
  s.parity = coordinate_parity(s);
  if (s.parity != 1) throw ContractViolation("tensorization requires an odd-parity witness");
  Witness out;
  out.q = w.q;
  out.shift_index = w.shift_index;
  for (int k = 0; k < d; ++k) {
    bool doubled = (d % 2 == 0) && k == 0;
    std::int64_t f = doubled ? 2 : 1;
    out.p.push_back(f * w.p[0]);
    IntVec qa = w.q;
    for (auto& v : qa) v *= f;
    out.q_axes.push_back(qa);
    out.err.push_back(static_cast<double>(f) * w.err[0]);
  }
  out.parity = coordinate_parity(out);
  return out;
}

inline Frequency liouville_number(std::uint64_t base, int depth,
                                  int precision = kDefaultPrecisionBits) {
  return Frequency::from_rational(liouville_rational(base, depth), Frequency::Kind::Liouville,
                                  "liouville:" + std::to_string(base) + ":" + std::to_string(depth),
                                  precision);
}

}  // namespace dioex
