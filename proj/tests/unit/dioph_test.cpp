#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dioex/dioph.hpp"
#include "oracles/brute.hpp"

using namespace dioex;

namespace {

std::vector<Frequency> one(const char* d, int prec = kDefaultPrecisionBits) {
  return {parse_frequency(d, prec)};
}

}  // namespace

TEST(Descriptor, ParsesGrammar) {
  EXPECT_NEAR(parse_frequency("sqrt:2").approx, std::sqrt(2.0), 1e-16);
  EXPECT_TRUE(parse_frequency("sqrt:9").is_rational());
  EXPECT_EQ(parse_frequency("sqrt:8").exact->radicand, 2u);
  EXPECT_EQ(parse_frequency("dec:1.5").rational(), Rational(3, 2));
  EXPECT_EQ(parse_frequency("dec:2.5e-1").rational(), Rational(1, 4));
  EXPECT_EQ(parse_frequency("dec:0.089").rational(), Rational(89, 1000));
  EXPECT_EQ(parse_frequency("dec:007").rational(), Rational(7));
  EXPECT_EQ(parse_frequency("cf:1,2").rational(), Rational(3, 2));
  EXPECT_EQ(parse_frequency("liouville:10:2").rational(), Rational(11, 100));
  EXPECT_THROW(parse_frequency("sqrt:abc"), ParseError);
  EXPECT_THROW(parse_frequency("pi"), ParseError);
  EXPECT_THROW(parse_frequency("cf:1,0"), ParseError);
  EXPECT_THROW(parse_frequency("dec:0"), ParseError);
}

TEST(Descriptor, TrackedErrorWithinBudget) {
  for (int prec : {64, 128, 256}) {
    Frequency f = parse_frequency("sqrt:3", prec);
    HighReal truth = boost::multiprecision::sqrt(HighReal(3));
    EXPECT_LE(boost::multiprecision::abs(f.value - truth), f.error);
    EXPECT_LE(f.error, boost::multiprecision::ldexp(f.value, 1 - prec));
  }
}

TEST(Descriptor, FrequenciesMatrix) {
  auto f = Frequencies::parse("sqrt:2;sqrt:3|sqrt:5;sqrt:7");
  EXPECT_EQ(f.d, 2);
  EXPECT_EQ(f.m, 2);
  EXPECT_EQ(f.walk_dimension(), 6);
  auto r = Frequencies::parse("sqrt:2", 3);
  EXPECT_EQ(r.d, 3);
  EXPECT_TRUE(r.pairwise_distinct());
  EXPECT_FALSE(Frequencies::parse("sqrt:2;sqrt:8").pairwise_distinct() &&
               Frequencies::parse("dec:1").pairwise_distinct());
  EXPECT_THROW(Frequencies::parse("sqrt:2|sqrt:3;sqrt:5"), ParseError);
}

TEST(Convergents, SqrtTwo) {
  auto c = cf_convergents(parse_frequency("sqrt:2"), 4);
  ASSERT_EQ(c.size(), 4u);
  const int want[4][2] = {{1, 1}, {3, 2}, {7, 5}, {17, 12}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(c[static_cast<std::size_t>(i)].p, want[i][0]);
    EXPECT_EQ(c[static_cast<std::size_t>(i)].q, want[i][1]);
  }
}

TEST(Convergents, GoldenRatioFromSqrtFive) {
  // (1 + sqrt5)/2 = cf:1,1,1,... ; a long cf prefix gives the same first convergents.
  auto c = cf_convergents(parse_frequency("cf:1,1,1,1,1,1,1,1,1,1,1,1"), 5);
  const int want[5][2] = {{1, 1}, {2, 1}, {3, 2}, {5, 3}, {8, 5}};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(c[static_cast<std::size_t>(i)].p, want[i][0]);
    EXPECT_EQ(c[static_cast<std::size_t>(i)].q, want[i][1]);
  }
}

TEST(Convergents, RationalTerminates) {
  auto c = cf_convergents(parse_frequency("dec:1.5"), 10);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.back().p, 3);
  EXPECT_EQ(c.back().q, 2);
}

TEST(Convergents, PrecisionExhaustion) {
  EXPECT_THROW(cf_convergents(parse_frequency("sqrt:2", 64), 200), PrecisionExhausted);
  EXPECT_NO_THROW(cf_convergents(parse_frequency("sqrt:2", 256), 60));
}

TEST(Convergents, BestApproximationProperty) {
  for (const char* d : {"sqrt:2", "sqrt:3", "sqrt:7", "sqrt:13"}) {
    auto w = one(d);
    long double x = std::sqrt(static_cast<long double>(std::stoi(std::string(d).substr(5))));
    auto conv = cf_convergents(w[0], 12);
    for (const auto& c : conv) {
      long long q = c.q.convert_to<long long>();
      if (q > 5000) break;
      long double dq = oracle::delta_brute({x}, {q});
      long double best = 1;
      for (long long qq = 1; qq <= q; ++qq) best = std::min(best, oracle::delta_brute({x}, {qq}));
      EXPECT_NEAR(static_cast<double>(dq), static_cast<double>(best), 1e-15) << d << " q=" << q;
      EXPECT_NEAR(delta_q(w, q).delta, static_cast<double>(dq), 1e-15);
    }
  }
}

TEST(Delta, Examples) {
  auto w = one("sqrt:2");
  auto r = delta_q(w, 2);
  EXPECT_NEAR(r.delta, 0.171573, 1e-6);
  EXPECT_EQ(r.p, 3);
  std::vector<Frequency> w2 = {parse_frequency("sqrt:2"), parse_frequency("sqrt:3")};
  IntVec q = {1, 1};
  auto r2 = delta_q(w2, q);
  EXPECT_NEAR(r2.delta, 0.146264, 1e-6);
  EXPECT_EQ(r2.p, 3);
  auto half = one("dec:0.5");
  EXPECT_EQ(delta_q(half, 2).delta, 0.0);
  EXPECT_TRUE(delta_q(half, 2).exact);
  auto tie = delta_q(half, 1);
  EXPECT_EQ(tie.delta, 0.5);
  EXPECT_EQ(tie.p, 0);
}

TEST(Delta, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::uniform_int_distribution<int> qd(-50, 50);
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng);
    std::vector<Frequency> w = {Frequency::from_value(HighReal(a)), Frequency::from_value(HighReal(b))};
    IntVec q = {qd(rng), qd(rng)};
    if (q[0] == 0 && q[1] == 0) continue;
    long long bp = 0;
    long double want = oracle::delta_brute({a, b}, {q[0], q[1]}, &bp);
    auto got = delta_q(w, q);
    EXPECT_NEAR(got.delta, static_cast<double>(want), 1e-13);
  }
}

TEST(Dirichlet, Examples) {
  auto w = one("sqrt:2");
  auto r = dirichlet_best(w, 12);
  EXPECT_EQ(r.q, IntVec{12});
  EXPECT_NEAR(r.delta, 17 - 12 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.delta, 0.029437, 1e-6);
  auto third = one("cf:0,3");
  EXPECT_EQ(dirichlet_best(third, 3).delta, 0.0);
  auto any = one("sqrt:5");
  EXPECT_LE(dirichlet_best(any, 1).delta, 0.5);
}

TEST(Dirichlet, InequalityOnRandomTuples) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int m : {1, 2}) {
    for (int t = 0; t < 50; ++t) {
      std::vector<Frequency> w;
      for (int i = 0; i < m; ++i) w.push_back(Frequency::from_value(HighReal(u(rng) + 1e-9)));
      auto prof = dirichlet_profile(w, 100);
      for (std::int64_t N = 10; N <= 100; ++N) {
        const auto& r = prof[static_cast<std::size_t>(N - 1)];
        EXPECT_LE(r.delta, r.bound);
        EXPECT_LE(r.delta, r.c_m * std::pow(std::sqrt(double(r.q[0] * r.q[0] + (m == 2 ? r.q[1] * r.q[1] : 0))), -m) + 1e-15);
      }
    }
  }
}

TEST(Psi, InverseExamples) {
  RegularPsi q2(2.0, 1.0);
  EXPECT_EQ(psi_inverse(q2, 0.01), 10u);
  EXPECT_EQ(psi_inverse(q2, 0.02), 8u);
  RegularPsi q1(1.0, 1.0);
  EXPECT_EQ(psi_inverse(q1, 1.0 / 7), 7u);
  RegularPsi logp(1.0, 1.0, 2.0);
  EXPECT_GE(logp.q0, 1u);
  for (std::uint64_t q = logp.q0; q < logp.q0 + 1000; ++q) {
    EXPECT_LT(logp(double(q + 1)), logp(double(q)));
    EXPECT_LE(logp(double(q)), 1.0);
  }
  auto inv = logp.inverse(1e-3);
  EXPECT_LE(logp(double(inv)), 1e-3);
  EXPECT_GT(logp(double(inv - 1)), 1e-3);
}

TEST(ApproxSet, Examples) {
  auto w = one("sqrt:2");
  auto s = i_eps_set(w, 0.18, 10);
  std::vector<std::int64_t> got;
  for (auto& e : s.elements) got.push_back(e.q[0]);
  EXPECT_EQ(got, (std::vector<std::int64_t>{2, 5, 7, 10}));
  auto s2 = i_eps_set(w, 0.08, 12);
  got.clear();
  for (auto& e : s2.elements) got.push_back(e.q[0]);
  EXPECT_EQ(got, (std::vector<std::int64_t>{5, 12}));
  EXPECT_TRUE(i_eps_set(w, 0.001, 12).elements.empty());
}

TEST(ApproxSet, SeparationUnderBaCertificate) {
  auto w = one("sqrt:2");
  RegularPsi psi(1.0, 0.14);
  ASSERT_TRUE(ba_certificate(w, psi, 10000).holds);
  for (int k = 3; k <= 9; ++k) {
    double eps = std::ldexp(1.0, -k);
    auto s = i_eps_set(w, eps, 4000, &psi);
    EXPECT_TRUE(s.complete_for_psi);
    EXPECT_TRUE(s.separation_holds) << "eps=2^-" << k << " gap " << s.min_gap;
  }
}

TEST(ApproxSet, GrowthBoundStableAcrossEps) {
  auto w = one("sqrt:2");
  RegularPsi psi(1.0, 0.14);
  std::vector<double> cs;
  for (int k = 3; k <= 8; ++k) {
    double eps = std::ldexp(1.0, -k);
    auto s = i_eps_set(w, eps, 20000, &psi);
    double rho = static_cast<double>(*s.psi_inverse_eps);
    double c = 1e300;
    for (std::size_t N = 1; N <= s.elements.size(); ++N) c = std::min(c, s.elements[N - 1].norm / (double(N) * rho));
    cs.push_back(c);
  }
  double lo = *std::min_element(cs.begin(), cs.end()), hi = *std::max_element(cs.begin(), cs.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi / lo, 4.0);
}

TEST(ApproxSet, MultiDimensional) {
  std::vector<Frequency> w = {parse_frequency("sqrt:2"), parse_frequency("sqrt:3")};
  auto s = i_eps_set(w, 0.05, 12);
  for (std::size_t i = 1; i < s.elements.size(); ++i) EXPECT_LE(s.elements[i - 1].norm, s.elements[i].norm);
  for (auto& e : s.elements) {
    EXPECT_LE(e.delta, 0.05);
    long double want = oracle::delta_brute({std::sqrt(2.0L), std::sqrt(3.0L)}, {e.q[0], e.q[1]});
    EXPECT_NEAR(e.delta, static_cast<double>(want), 1e-14);
  }
}

TEST(BaCertificate, Examples) {
  auto w = one("sqrt:2");
  auto ok = ba_certificate(w, RegularPsi(1.0, 0.14), 10000);
  EXPECT_TRUE(ok.holds);
  EXPECT_GE(ok.worstRatio, 1.0);
  auto bad = ba_certificate(w, RegularPsi(0.5, 1.0), 100);
  EXPECT_FALSE(bad.holds);
  RegularPsi big(1.0, 1e6);
  auto vac = ba_certificate(w, big, 100);
  EXPECT_TRUE(vac.holds);
  EXPECT_TRUE(vac.emptyRange);
}

TEST(Witnesses, SqrtTwo) {
  auto w = one("sqrt:2");
  auto rep = wa_witnesses(w, RegularPsi(1.0, 1.0), 1.0, 20, 30);
  bool has32 = false, has75 = false;
  for (auto& x : rep.witnesses) {
    if (x.p[0] == 3 && x.q[0] == 2) has32 = x.parity == 1;
    if (x.p[0] == 7 && x.q[0] == 5) has75 = x.parity == 0;
    EXPECT_LE(x.err[0], 1.0 / double(x.q[0]));
  }
  EXPECT_TRUE(has32);
  EXPECT_TRUE(has75);
  EXPECT_EQ(rep.witnesses.front().parity, 1);
}

TEST(Witnesses, RationalHit) {
  auto w = one("dec:0.5");
  auto rep = wa_witnesses(w, RegularPsi(2.0, 1.0), 1.0, 5, 10);
  bool found = false;
  for (auto& x : rep.witnesses)
    if (x.p[0] == 1 && x.q[0] == 2) found = x.err[0] == 0.0;
  EXPECT_TRUE(found);
}

TEST(Witnesses, ParityFixOnEvenSequence) {
  // Even-parity witnesses for sqrt2: (14,10) = 2*(7,5) and (82,58) = 2*(41,29).
  std::vector<Witness> even;
  for (auto [p, q] : {std::pair<long, long>{14, 10}, {82, 58}, {6, 4}}) {
    Witness x;
    x.p = {p};
    x.q = {q};
    x.err = {std::abs(double(p) - double(q) * std::sqrt(2.0))};
    x.parity = coordinate_parity(x);
    ASSERT_EQ(x.parity, 0);
    even.push_back(x);
  }
  auto rep = parity_fix(even);
  // (6,4) reduces to (3,2) which is already odd; the others need the shift.
  EXPECT_EQ(rep.shift_index, 1);
  int shifted = 0;
  for (auto& x : rep.witnesses) {
    EXPECT_EQ(x.parity, 1);
    if (x.shift_index == 1) {
      ++shifted;
      // p' - (omega - 1) q equals p~ - omega q~
      double err = std::abs(double(x.p[0]) - (std::sqrt(2.0) - 1) * double(x.q[0]));
      EXPECT_NEAR(err, x.err[0], 1e-12);
    }
  }
  EXPECT_EQ(shifted, 2);
}

TEST(Tensorize, OddAndEvenDimension) {
  Witness w;
  w.p = {3};
  w.q = {2};
  w.err = {3 - 2 * std::sqrt(2.0)};
  w.parity = 1;
  auto t3 = swa_star_tensorize(w, 3);
  EXPECT_EQ(t3.p, (IntVec{3, 3, 3}));
  EXPECT_EQ(t3.parity, 1);
  auto t2 = swa_star_tensorize(w, 2);
  EXPECT_EQ(t2.p, (IntVec{6, 3}));
  EXPECT_EQ(t2.q_axes[0], IntVec{4});
  EXPECT_EQ(t2.q_axes[1], IntVec{2});
  EXPECT_EQ(t2.parity, 1);
  for (double e : t2.err) EXPECT_LE(e, 2 * w.err[0] + 1e-15);
  Witness ev = w;
  ev.p = {7};
  ev.q = {5};
  EXPECT_THROW(swa_star_tensorize(ev, 2), ContractViolation);
}

TEST(Tensorize, ParityAlwaysOdd) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pd(-40, 40);
  for (int t = 0; t < 500; ++t) {
    Witness w;
    w.q = {pd(rng), pd(rng)};
    w.p = {pd(rng)};
    if ((w.p[0] + w.q[0] + w.q[1]) % 2 == 0) w.p[0] += 1;
    w.err = {0.01};
    w.parity = coordinate_parity(w);
    for (int d = 1; d <= 6; ++d) {
      auto o = swa_star_tensorize(w, d);
      EXPECT_EQ(o.parity, 1);
      for (double e : o.err) EXPECT_LE(e, 2 * w.err[0]);
    }
  }
}

TEST(Liouville, ExactValues) {
  EXPECT_EQ(liouville_number(10, 2).rational(), Rational(11, 100));
  EXPECT_EQ(liouville_number(2, 3).rational(), Rational(49, 64));
  EXPECT_DOUBLE_EQ(liouville_number(2, 3).approx, 0.765625);
  auto L = std::vector<Frequency>{liouville_number(10, 4)};
  auto r = delta_q(L, 1'000'000);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.delta, 1e-18, 1e-30);
  // delta at base^{k!} is at most 2 * base^{k! - (k+1)!}
  auto L5 = std::vector<Frequency>{liouville_number(2, 5)};
  long fact = 1;
  for (int k = 1; k < 5; ++k) {
    fact *= k;
    if (fact > 40) break;
    std::int64_t q = std::int64_t{1} << fact;
    double bound = 2 * std::ldexp(1.0, static_cast<int>(fact - fact * (k + 1)));
    EXPECT_LE(delta_q(L5, q).delta, bound);
  }
}
