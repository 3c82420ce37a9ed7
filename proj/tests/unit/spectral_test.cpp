#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dioex/spectral/arcsine.hpp"
#include "dioex/spectral/fit.hpp"
#include "dioex/spectral/measure.hpp"
#include "dioex/spectral/structure.hpp"
#include "dioex/spectral/variance.hpp"
#include "dioex/spectral/window.hpp"
#include "oracles/quadrature.hpp"

using namespace dioex;

namespace {

WalkConfig sqrt2_walk(int d = 1) { return WalkConfig::uniform_for(Frequencies::parse("sqrt:2", d)); }

}  // namespace

TEST(Measure, AtomsAndWeights) {
  auto mu = make_mu(Frequencies::parse("sqrt:2"));
  ASSERT_EQ(mu.atoms.size(), 4u);
  std::multiset<double> locs;
  double total = 0;
  for (const auto& a : mu.atoms) {
    EXPECT_DOUBLE_EQ(a.weight, 0.25);
    locs.insert(a.location[0]);
    total += a.weight;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_EQ(locs, (std::multiset<double>{-std::sqrt(2.0), -1.0, 1.0, std::sqrt(2.0)}));
  EXPECT_FALSE(mu.commensurate);

  auto mu2 = make_mu(Frequencies::parse("sqrt:2", 2));
  ASSERT_EQ(mu2.atoms.size(), 8u);
  for (const auto& a : mu2.atoms) {
    EXPECT_DOUBLE_EQ(a.weight, 0.125);
    EXPECT_TRUE(a.location[0] == 0 || a.location[1] == 0);
  }

  auto mu0 = make_mu(Frequencies::parse("", 3));
  ASSERT_EQ(mu0.atoms.size(), 6u);
  for (const auto& a : mu0.atoms) EXPECT_DOUBLE_EQ(a.weight, 1.0 / 6);

  EXPECT_TRUE(make_mu(Frequencies::parse("dec:1")).commensurate);
}

TEST(Measure, Covariance) {
  auto mu = make_mu(Frequencies::parse("sqrt:2"));
  EXPECT_DOUBLE_EQ(covariance(mu, {0.0}), 1.0);
  EXPECT_NEAR(covariance(mu, {M_PI}), (std::cos(M_PI) + std::cos(std::sqrt(2.0) * M_PI)) / 2, 1e-15);
  EXPECT_NEAR(covariance(mu, {M_PI}), -0.63313, 1e-5);
  for (double t : {0.3, 1.7, 12.5, 101.0}) {
    EXPECT_DOUBLE_EQ(covariance(mu, {t}), covariance(mu, {-t}));
    EXPECT_LE(std::abs(covariance(mu, {t})), 1.0);
  }
}

TEST(Measure, ZFree) {
  auto a = zfree_check(Frequencies::parse("sqrt:2"), 1000000);
  EXPECT_TRUE(a.zfree);
  EXPECT_TRUE(a.symbolic);

  auto b = zfree_check(Frequencies::parse("dec:1.5"), 4);
  EXPECT_FALSE(b.zfree);
  ASSERT_EQ(b.relation.size(), 3u);
  // q0 + q1 * 1.5 = 0 with the scan's first hit proportional to (3, -2)
  EXPECT_EQ(b.relation[1] * 2 + b.relation[2] * 3, 0);

  auto c = zfree_check(Frequencies::parse("sqrt:2;sqrt:8"), 2);
  EXPECT_FALSE(c.zfree);
  EXPECT_FALSE(c.symbolic);
  ASSERT_EQ(c.relation.size(), 4u);
  EXPECT_EQ(c.relation[1], 0);
  EXPECT_EQ(c.relation[2] + 2 * c.relation[3], 0);  // sqrt 8 = 2 sqrt 2

  EXPECT_TRUE(zfree_check(Frequencies::parse("sqrt:2;sqrt:3"), 3).zfree);
}

TEST(Arcsine, Coefficients) {
  EXPECT_DOUBLE_EQ(arcsine_coeff(1), 1.0);
  EXPECT_NEAR(arcsine_coeff(3), 1.0 / 6, 1e-15);
  EXPECT_NEAR(arcsine_coeff(5), 3.0 / 40, 1e-15);
  EXPECT_EQ(arcsine_coeff(4), 0.0);
  EXPECT_EQ(arcsine_coeff_exact(3), Rational(1, 6));
  EXPECT_EQ(arcsine_coeff_exact(5), Rational(3, 40));
  EXPECT_EQ(arcsine_coeff_exact(7), Rational(5, 112));
  // alpha_{2k+1} k^{3/2} -> 1/(2 sqrt(pi)), approached from below like (1 - 5/(8k))
  const double a101 = arcsine_coeff(101) * std::pow(50.0, 1.5);
  EXPECT_GE(a101, 0.27);
  EXPECT_LE(a101, 0.30);
  for (int k = 10; k <= 1000; ++k) {
    const double v = arcsine_coeff(2 * k + 1) * std::pow(k, 1.5);
    EXPECT_GE(v, k >= 15 ? 0.27 : 0.26) << k;
    EXPECT_LE(v, 0.35);
    EXPECT_LT(v, 1 / (2 * std::sqrt(M_PI)));
  }
  for (std::int64_t n = 1; n < 200; n += 2)
    EXPECT_NEAR(std::exp(log_series_weight(static_cast<double>(n))), series_weight(n), 1e-13 * series_weight(n));
}

TEST(Arcsine, SeriesSum) {
  double s = 0;
  const int K = 20000;
  for (int k = 0; k <= K; ++k) s += arcsine_coeff(2 * k + 1);
  double bound = 0;
  for (int k = K + 1; k < 50 * K; ++k) bound += 0.29 * std::pow(k, -1.5);
  bound += 0.29 * 2 / std::sqrt(50.0 * K);
  EXPECT_LE(M_PI / 2 - s, 2 * bound);
  EXPECT_GE(M_PI / 2 - s, 0.0);
  EXPECT_NEAR(series_weight_partial(2 * K + 1), s / (2 * M_PI), 1e-12);
  EXPECT_GE(series_weight_tail(2 * K + 1), 0.25 - series_weight_partial(2 * K + 1));
}

TEST(Arcsine, GammaU) {
  EXPECT_DOUBLE_EQ(gamma_u(1.0, 0.0), 0.25);
  EXPECT_NEAR(gamma_u(0.5, 0.0), 1.0 / 12, 1e-14);
  for (int i = -10; i <= 10; ++i) {
    const double rho = i == -10 ? -0.99 : i == 10 ? 0.99 : i / 10.0;
    EXPECT_LE(std::abs(gamma_u(rho, 0.0) - std::asin(rho) / (2 * M_PI)), 1e-10) << rho;
  }
  for (double u : {0.5, 1.0, -0.7})
    for (double rho : {-0.9, -0.3, 0.2, 0.5, 0.95})
      EXPECT_NEAR(gamma_u(rho, u), oracle::indicator_covariance(rho, u), 1e-11) << rho << ' ' << u;
  const double q = normal_cdf(-1.0);
  EXPECT_NEAR(gamma_u(1.0, 1.0), q * (1 - q), 1e-15);
  EXPECT_NEAR(gamma_u(-1.0, 1.0), -q * q, 1e-15);
}

TEST(Arcsine, GammaUMonteCarlo) {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> g;
  const int N = 2000000;
  const double rho = 0.5, s = std::sqrt(1 - rho * rho);
  double both = 0, x1 = 0, y1 = 0;
  for (int i = 0; i < N; ++i) {
    const double x = g(rng), y = rho * x + s * g(rng);
    both += (x > 1 && y > 1);
    x1 += x > 1;
    y1 += y > 1;
  }
  const double cov = both / N - (x1 / N) * (y1 / N);
  const double p = both / N;
  const double se = std::sqrt(p * (1 - p) / N) * 1.5;
  EXPECT_NEAR(gamma_u(rho, 1.0), cov, 3 * se);
}

TEST(Arcsine, LevelCoefficientsMatchHermiteSeries) {
  for (double u : {0.5, 1.0}) {
    auto c = fit_gamma_coefficients(u);
    EXPECT_NEAR(c[0], 0.0, 1e-7);
    for (int k = 1; k <= 4; ++k)
      EXPECT_NEAR(c[static_cast<std::size_t>(k)], hermite_coeff(k, u), 2e-3 * hermite_coeff(1, u)) << k;
    EXPECT_GT(c[2] + c[4], 0.0);
  }
}

TEST(Window, Values) {
  EXPECT_DOUBLE_EQ(window_hat(1, 0.0), 2.0);
  EXPECT_NEAR(window_hat(1, 1e-6), 2.0, 1e-11);
  EXPECT_NEAR(window_hat(3, 0.0), 4 * M_PI / 3, 1e-14);
  EXPECT_NEAR(window_hat(2, 0.0), M_PI, 1e-14);
  EXPECT_NEAR(window_hat(2, 1.0), 2 * M_PI * std::cyl_bessel_j(1.0, 1.0), 1e-14);
  EXPECT_NEAR(window_hat(2, 1.0), 2.76503, 2e-4);
  for (double r : {0.3, 1.0, 2.5, 7.9, 8.1, 15.0, 40.0})
    EXPECT_NEAR(window_hat(2, r), oracle::disk_transform(r), 1e-12) << r;
  for (double r : {5e-3, 2e-2, 1.0, 9.0})
    EXPECT_NEAR(window_hat(3, r), 4 * M_PI * (std::sin(r) - r * std::cos(r)) / (r * r * r), 1e-9) << r;
  EXPECT_NEAR(window_hat(4, 2.0), std::pow(M_PI, 2) * 4 * std::cyl_bessel_j(2.0, 2.0) / 4, 1e-12);
  EXPECT_NEAR(window_hat(5, 0.0), unit_ball_volume(5), 1e-14);
}

TEST(Window, PositivityDecayAndZeros) {
  for (int d = 1; d <= 3; ++d) {
    for (int i = 0; i <= 2000; ++i) EXPECT_GT(window_hat(d, i * 1e-3), 0.0);
    auto w = make_window(d);
    EXPECT_NEAR(w.kappa, unit_ball_volume(d), 1e-14);
    EXPECT_GT(w.positivityFloor, 0.0);
    const double amplitude[] = {2.0, 2 * std::sqrt(2 * M_PI), 4 * M_PI};  // leading oscillation amplitudes
    EXPECT_GT(w.c3, 0.0);
    EXPECT_LT(w.c3, 1.1 * amplitude[d - 1]);
    for (double r : {1.5, 33.3, 999.0}) EXPECT_LE(std::abs(window_hat(d, r)) * std::pow(r, 0.5 * (d + 1)), w.c3 * 1.001);
  }
  EXPECT_NEAR(window_first_zero(1), M_PI, 1e-12);
  EXPECT_NEAR(window_first_zero(2), 3.8317059702, 1e-9);
  EXPECT_NEAR(window_first_zero(3), 4.4934094579, 1e-9);
}

TEST(Variance, SmallTLimit) {
  auto cfg = sqrt2_walk();
  auto r = variance_series(cfg, 1e-3, 101);
  EXPECT_NEAR(r.estimate / std::pow(1e-3, 2), 4 * 0.25, 1e-3);
  EXPECT_EQ(r.normalization, std::string("T^2d/(2pi)"));
}

TEST(Variance, MatchesQuadrature) {
  auto cfg = sqrt2_walk();
  auto mu = make_mu(*cfg.freqs);
  auto C = [&](double t) { return covariance(mu, {t}); };
  VarianceOptions o;
  o.nMax = 300;
  auto reps = variance_series_multi(cfg, {0.25, 1.0, 3.0}, o);
  for (const auto& r : reps) {
    const double v = oracle::excursion_variance_1d(C, r.T);
    EXPECT_NEAR(r.estimate, v, 1e-4 * v) << r.T;
    EXPECT_LE(r.lo(), v);
    EXPECT_GE(r.hi(), v);
    EXPECT_GE(r.series.partial, 0.0);
  }
}

TEST(Variance, PruneConsistency) {
  auto cfg = sqrt2_walk();
  const double p = 1e-10;
  auto a = variance_series(cfg, 2.0, 200, p);
  auto b = variance_series(cfg, 2.0, 200, p / 10);
  EXPECT_LE(std::abs(a.series.partial - b.series.partial),
            std::max(a.series.lostInflation, b.series.lostInflation) + 1e-15);
}

TEST(Variance, LevelLowOrderPositive) {
  auto cfg = sqrt2_walk();
  for (double u : {0.5, 1.0}) {
    auto r = variance_series_level(cfg, 2.0, u);
    EXPECT_GT(r.lowOrder, 0.0);
    EXPECT_GE(r.partial, 0.0);
  }
}

TEST(Structure, BallValues) {
  auto cfg = sqrt2_walk();
  auto s = structure_factor_ball(cfg, 0.1, 9);
  EXPECT_EQ(s.partial, 0.0);
  auto big = structure_factor_ball(cfg, 1.5, 1);
  EXPECT_GE(big.partial, series_weight(1) - 1e-16);
  double prev = 0;
  for (double eps : {0.05, 0.2, 0.45, 0.6, 1.0, 1.5}) {
    auto r = structure_factor_ball(cfg, eps, 15);
    EXPECT_GE(r.partial, prev);
    prev = r.partial;
  }
}

TEST(Structure, AtomsAtFirstOrder) {
  auto atoms = structure_factor_atoms(sqrt2_walk(), 1, {-3}, {3});
  ASSERT_EQ(atoms.size(), 4u);
  for (const auto& a : atoms) EXPECT_NEAR(a.weight, 1 / (8 * M_PI), 1e-16);
  EXPECT_NEAR(atoms[0].location[0], -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(atoms[3].location[0], std::sqrt(2.0), 1e-15);
}

TEST(Structure, PlanarSymmetry) {
  auto atoms = structure_factor_atoms(sqrt2_walk(2), 5, {-3, -3}, {3, 3});
  ASSERT_FALSE(atoms.empty());
  auto find = [&](double x, double y) {
    for (const auto& a : atoms)
      if (std::abs(a.location[0] - x) < 1e-12 && std::abs(a.location[1] - y) < 1e-12) return a.weight;
    return -1.0;
  };
  double total = 0;
  for (const auto& a : atoms) {
    const double x = a.location[0], y = a.location[1];
    total += a.weight;
    for (auto [sx, sy] : {std::pair{-x, y}, {x, -y}, {y, x}, {-y, -x}, {-x, -y}}) EXPECT_NEAR(find(sx, sy), a.weight, 1e-15);
  }
  EXPECT_LT(total, series_weight_partial(5) + 1e-15);
  EXPECT_LT(total, 0.25);
}

TEST(Fit, Examples) {
  std::vector<std::pair<double, double>> cubic, flat;
  for (double T : {1.0, 2.0, 5.0, 10.0, 40.0}) {
    cubic.push_back({T, T * T * T});
    flat.push_back({T, 7.0});
  }
  EXPECT_NEAR(scaling_fit(cubic).slope, 3.0, 1e-12);
  EXPECT_NEAR(scaling_fit(flat).slope, 0.0, 1e-12);
  EXPECT_THROW(scaling_fit({{1, 1}, {2, 2}, {3, 3}}), std::exception);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 10; ++i) {
      const double T = std::pow(10.0, i / 10.0);
      pts.push_back({T, 3 * T * T * (1 + noise(rng))});
    }
    auto f = scaling_fit(pts);
    EXPECT_NEAR(f.slope, 2.0, 0.15);
    EXPECT_GT(f.residual, 0.0);
  }
}
