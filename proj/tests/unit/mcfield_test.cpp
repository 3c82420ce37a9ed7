#include <gtest/gtest.h>

#include <cmath>

#include "dioex/mcfield/estimate.hpp"
#include "dioex/spectral/measure.hpp"
#include "dioex/spectral/variance.hpp"

using namespace dioex;

namespace {

Frequencies sqrt2() { return Frequencies::parse("sqrt:2"); }

}  // namespace

TEST(Field, SamplingIsDeterministic) {
  auto a = sample_field(sqrt2(), 42, 3);
  auto b = sample_field(sqrt2(), 42, 3);
  auto c = sample_field(sqrt2(), 43, 3);
  auto e = sample_field(sqrt2(), 42, 4);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_NE(a.coefficients, c.coefficients);
  EXPECT_NE(a.coefficients, e.coefficients);
  EXPECT_EQ(a.coefficients.size(), 4u);
  EXPECT_DOUBLE_EQ(a.normalization, 1 / std::sqrt(2.0));
}

TEST(Field, CoefficientMoments) {
  Stream rng(7, 0, StreamTag::Field);
  const int N = 100000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < N; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / N, var = s2 / N - mean * mean;
  EXPECT_LT(std::abs(mean), 4 / std::sqrt(N));
  EXPECT_LT(std::abs(var - 1), 4 * std::sqrt(2.0 / N));
}

TEST(Field, Evaluation) {
  auto s = make_field({{1.0, std::sqrt(2.0)}}, {1, 0, 0, 0});
  EXPECT_DOUBLE_EQ(field_eval(s, {0.0}), 1 / std::sqrt(2.0));
  EXPECT_NEAR(field_eval(s, {1.0}), std::cos(1.0) / std::sqrt(2.0), 1e-15);
  auto z = make_field({{1.0, 2.0}, {1.0, 3.0}}, std::vector<double>(8, 0.0));
  EXPECT_EQ(field_eval(z, {0.3, -4.0}), 0.0);
  auto p = make_field({{1.0}, {1.0}}, {0, 1, 1, 0});
  EXPECT_NEAR(field_eval(p, {0.5, 0.25}), (std::sin(0.5) + std::cos(0.25)) / std::sqrt(2.0), 1e-15);
}

TEST(Field, StationarityAndCovariance) {
  auto f = sqrt2();
  auto mu = make_mu(f);
  const int N = 100000;
  std::vector<double> ts;
  for (int i = 0; i < 20; ++i) ts.push_back(-7 + 0.73 * i);
  ts.push_back(1.3);
  std::vector<double> s1(ts.size()), sp(ts.size()), spp(ts.size());
  double x0sum = 0;
  for (int r = 0; r < N; ++r) {
    auto s = sample_field(f, 11, static_cast<std::uint64_t>(r));
    const double x0 = field_eval(s, {0.0});
    x0sum += x0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double x = field_eval(s, {ts[j]});
      s1[j] += x;
      sp[j] += x * x0;
      spp[j] += x * x * x0 * x0;
    }
  }
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const double cov = sp[j] / N - (s1[j] / N) * (x0sum / N);
    const double se = std::sqrt((spp[j] / N - (sp[j] / N) * (sp[j] / N)) / N);
    EXPECT_LE(std::abs(cov - covariance(mu, {ts[j]})), (ts[j] == 1.3 ? 4 : 5) * se) << ts[j];
    if (j % 4 == 0) {
      EXPECT_LE(std::abs(s1[j] / N), 4 / std::sqrt(N)) << ts[j];
    }
  }
}

TEST(Excursion, Examples) {
  auto s = make_field({{1.0, std::sqrt(2.0)}}, {1, 0, 0, 0});
  auto v = excursion_volume(s, M_PI, 16);
  EXPECT_NEAR(v.volume, M_PI, v.errorBound + 1e-12);
  EXPECT_NEAR(v.volume, M_PI, 2 * v.h);
  EXPECT_EQ(excursion_volume(s, M_PI, 16, 1e6).volume, 0.0);
  auto t = excursion_volume(s, M_PI, 16, -1e6);
  EXPECT_NEAR(t.volume, 2 * M_PI, 1e-12);
  auto disk = excursion_volume(make_field({{1.0}, {1.0}}, {0, 0, 0, 0}), 5.0, 16, -1.0);
  EXPECT_NEAR(disk.volume, M_PI * 25, disk.errorBound);
  EXPECT_LT(std::abs(disk.volume - M_PI * 25), 0.02 * M_PI * 25);
}

TEST(Excursion, GridRefinementWithinBound) {
  auto f = sqrt2();
  for (std::uint64_t r = 0; r < 20; ++r) {
    auto s = sample_field(f, 5, r);
    auto a = excursion_volume(s, 10, 16), b = excursion_volume(s, 10, 32);
    EXPECT_LE(std::abs(a.volume - b.volume), a.errorBound) << r;
  }
  auto g = Frequencies::parse("sqrt:2", 2);
  for (std::uint64_t r = 0; r < 3; ++r) {
    auto s = sample_field(g, 5, r);
    auto a = excursion_volume(s, 6, 16), b = excursion_volume(s, 6, 32);
    EXPECT_LE(std::abs(a.volume - b.volume), a.errorBound) << r;
  }
}

TEST(McEstimate, MeanIsHalfTheBall) {
  McOptions o;
  o.keepVolumes = true;
  auto e = variance_mc(sqrt2(), 10, 2000, 16, 1, 0.0, o);
  EXPECT_NEAR(e.mean, 10.0, 4 * std::sqrt(e.variance / 2000));
  EXPECT_EQ(e.volumes.size(), 2000u);
  auto g = variance_mc(Frequencies::parse("sqrt:2", 2), 4, 400, 16, 1);
  EXPECT_NEAR(g.mean, M_PI * 8, 4 * std::sqrt(g.variance / 400));
}

TEST(McEstimate, DeterministicAcrossThreads) {
  McOptions one, many;
  one.threads = 1;
  many.threads = 7;
  one.keepVolumes = many.keepVolumes = true;
  auto a = variance_mc(sqrt2(), 5, 300, 16, 99, 0.0, one);
  auto b = variance_mc(sqrt2(), 5, 300, 16, 99, 0.0, many);
  EXPECT_EQ(a.volumes, b.volumes);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(a.stderrOfVariance, b.stderrOfVariance);
}

TEST(McEstimate, FewReplicationsFlagged) {
  auto e = variance_mc(sqrt2(), 5, 2, 16, 3);
  EXPECT_TRUE(e.unreliable);
  EXPECT_FALSE(variance_mc(sqrt2(), 5, 40, 16, 3).unreliable);
}

TEST(McEstimate, JackknifeMatchesGaussianTheory) {
  // for i.i.d. N(0, s^2) the sample variance has standard error s^2 sqrt(2/(n-1))
  Stream rng(3, 0, StreamTag::Field);
  const int n = 4000;
  std::vector<double> x(n);
  for (double& v : x) v = 3 * rng.normal();
  McEstimate e;
  detail::variance_with_jackknife(x, 1, e);
  EXPECT_NEAR(e.variance, 9, 4 * 9 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e.stderrOfVariance, 9 * std::sqrt(2.0 / (n - 1)), 0.1 * 9 * std::sqrt(2.0 / n));
}

TEST(McEstimate, AgreesWithSeries) {
  auto cfg = WalkConfig::uniform_for(sqrt2());
  VarianceOptions o;
  o.nMax = 400;
  auto series = variance_series_multi(cfg, {5.0}, o)[0];
  auto mc = variance_mc(sqrt2(), 5, 2000, 16, 2024);
  EXPECT_LE(std::abs(series.estimate - mc.variance), 3 * mc.stderrOfVariance);
}

TEST(Randomized, DegenerateLawReducesToFixed) {
  McOptions o;
  o.keepVolumes = true;
  auto law = FrequencyLaw::parse("fixed:sqrt:2");
  auto r = randomized_run(law, 1, 1, 5, 200, 17, 16, 0.0, 1, o);
  auto e = variance_mc(sqrt2(), 5, 200, 16, 17, 0.0, o);
  EXPECT_EQ(r.total.volumes, e.volumes);
  EXPECT_EQ(r.total.variance, e.variance);
}

TEST(Randomized, ConditionalMeanIsDeterministic) {
  auto law = FrequencyLaw::parse("uniform:1.1,1.9");
  auto r = randomized_run(law, 1, 1, 10, 800, 5, 16, 0.0, 2);
  EXPECT_DOUBLE_EQ(r.expectedMean, 10.0);
  EXPECT_NEAR(r.total.mean, r.expectedMean, 4 * std::sqrt(r.total.variance / 1600));
  // Var(E[M | Omega]) = 0: the unbiased estimate is within noise of 0
  EXPECT_LT(std::abs(r.varianceOfConditionalMean), 0.25 * r.meanConditionalVariance);
  auto t = FrequencyLaw::parse("tuple:1,2");
  Stream rng(1, 0, StreamTag::Law);
  auto axes = t.draw(2, 1, rng);
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_NE(axes[0], axes[1]);
  EXPECT_THROW(FrequencyLaw::parse("uniform:2,1"), ParseError);
  EXPECT_THROW(FrequencyLaw::parse("normal:0,1"), ParseError);
}
