#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "srd/csv.hpp"
#include "srd/rng.hpp"
#include "srd/simulate.hpp"

using namespace srd;
using namespace srd::simulate;

namespace {

constexpr double kPi = std::numbers::pi;

levy::LevyTriplet stable(double alpha) {
  return {0.0, 0.0, levy::LevyMeasure(levy::calibrated_stable(alpha))};
}
levy::LevyTriplet gaussian() { return {0.0, 1.0, levy::LevyMeasure()}; }

SimConfig config(std::size_t n, std::vector<std::vector<double>> lags = {}, double window = 3.0) {
  SimConfig c;
  c.h = 0.01;
  c.window = window;
  c.samples = n;
  c.seed = 2024;
  c.lags = std::move(lags);
  return c;
}

TEST(StableVariate, CharacteristicFunction) {
  CounterRng rng(5, 0);
  const int n = 200000;
  for (double alpha : {0.5, 1.0, 1.5}) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::cos(symmetric_stable(alpha, rng.uniform_open(), rng.uniform_open()));
    EXPECT_NEAR(acc / n, std::exp(-1.0), 4.0 / std::sqrt(n)) << "alpha=" << alpha;
  }
}

TEST(Sample, ReproducibleAndThreadIndependent) {
  auto c = config(2000, {{0.5}});
  c.threads = 1;
  const auto a = sample_field(kernels::unit_box(1), stable(1.0), c);
  c.threads = 3;
  const auto b = sample_field(kernels::unit_box(1), stable(1.0), c);
  EXPECT_EQ(a.values, b.values);
  c.seed += 1;
  EXPECT_NE(a.values, sample_field(kernels::unit_box(1), stable(1.0), c).values);
  EXPECT_EQ(a.cols, 2u);
  for (double v : a.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Sample, ZeroKernelGivesZeros) {
  const auto s = sample_field(kernels::box({0.0}, {1.0}, 0.0), stable(1.0), config(100));
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(Sample, GaussianVariance) {
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::unit_box(1), gaussian(), config(n));
  double m = 0.0;
  double q = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    m += s.at(r, 0);
    q += s.at(r, 0) * s.at(r, 0);
  }
  const double var = q / n - (m / n) * (m / n);
  EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(Sample, StableCharAtOne) {
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(n));
  EXPECT_LE(std::abs(empirical_char_X0(s, 1.0) - std::exp(-1.0)), 4.0 / std::sqrt(n));
}

TEST(Sample, CompoundPoissonMatchesCharX0) {
  const levy::LevyTriplet tr(0.3, 0.0,
                             levy::LevyMeasure(levy::CompoundPoisson{2.0, {-1.5, 0.5, 0.8}, {0.3, 0.3, 0.4}}));
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::tent(1), tr, config(n));
  for (double u : {0.5, 1.0, 2.0}) {
    const auto want = spectral::char_X0(kernels::tent(1), tr, u).value;
    EXPECT_LE(std::abs(empirical_char_X0(s, u) - want), 4.0 / std::sqrt(n)) << "u=" << u;
  }
}

TEST(Sample, HalvingCellSizeIsConsistent) {
  const std::size_t n = 20000;
  auto c = config(n);
  c.h = 0.1;
  const auto coarse = sample_field(kernels::tent(1), stable(1.0), c);
  c.h = 0.05;
  const auto fine = sample_field(kernels::tent(1), stable(1.0), c);
  EXPECT_LE(std::abs(empirical_char_X0(coarse, 1.0) - empirical_char_X0(fine, 1.0)), 4.0 * std::sqrt(2.0 / n));
}

TEST(Sample, ConfigValidation) {
  EXPECT_THROW(sample_field(kernels::unit_box(1), stable(1.0), config(10, {}, 1.0)), Rejection);
  auto c = config(10);
  c.h = 0.007;
  EXPECT_THROW(sample_field(kernels::unit_box(1), stable(1.0), c), Rejection);
  c = config(10, {{0.5, 0.5}});
  EXPECT_THROW(sample_field(kernels::unit_box(1), stable(1.0), c), Rejection);
  const levy::LevyTriplet tab(0.0, 0.0, levy::LevyMeasure::tabulated({{-2, 1}, {-1, 1}, {1, 1}, {2, 1}}));
  EXPECT_THROW(sample_field(kernels::unit_box(1), tab, config(10)), Rejection);
}

TEST(Sample, CsvRoundTrip) {
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(50, {{0.5}}));
  std::stringstream ss;
  s.write_csv(ss);
  const auto t = csv::read(ss);
  ASSERT_EQ(t.rows.size(), 50u);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_EQ(t.number(r, "x1"), s.at(r, 1));
}

TEST(EmpiricalChar, TrivialAndGaussian) {
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::unit_box(1), gaussian(), config(n, {{0.5}, {5.0}}, 6.0));
  EXPECT_EQ(empirical_char(s, 0.0, 0.0, 0), std::complex<double>(1.0, 0.0));
  EXPECT_LE(std::abs(empirical_char(s, 1.0, 0.0, 0) - std::exp(-0.5)), 4.0 / std::sqrt(n));
  // lag 5 is beyond the dependence range
  const auto joint = empirical_char(s, 1.0, 0.7, 1);
  double re1 = 0.0;
  for (std::size_t r = 0; r < n; ++r) re1 += std::cos(s.at(r, 2));
  const auto prod = std::exp(-0.5) * std::exp(-0.5 * 0.49);
  EXPECT_LE(std::abs(joint - prod), 6.0 / std::sqrt(n));
  EXPECT_LE(std::abs(joint), 1.0);
}

TEST(IndicatorCov, ConstantAndIndependent) {
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(n, {{5.0}}, 6.0));
  EXPECT_EQ(indicator_cov(s, 0, -1e300, -1e300), 0.0);
  EXPECT_LE(std::abs(indicator_cov(s, 0, 0.0, 0.0)), 3.0 / std::sqrt(n));
  const double c = indicator_cov(s, 0, 0.3, -0.2);
  EXPECT_LE(std::abs(c), 0.25);
}

// Cov(1{X(t)>0}, 1{X(0)>0}) by the inversion formula for a symmetric field:
// (1 / (2 pi^2)) \int\int_{R_+^2} (phi_t(s1, -s2) - phi_t(s1, s2)) / (s1 s2).
double inversion_cov_stable_box(double t) {
  auto phi = [t](double a, double b) {
    return std::exp(-((1.0 - t) * std::abs(a + b) + t * std::abs(a) + t * std::abs(b)));
  };
  boost::math::quadrature::exp_sinh<double> outer;
  auto inner = [&](double a) {
    boost::math::quadrature::exp_sinh<double> in;
    return in.integrate([&](double b) {
      const double ab = a * b;
      if (ab == 0.0 || !std::isfinite(ab)) return 0.0;
      const double v = (phi(a, -b) - phi(a, b)) / ab;
      return std::isfinite(v) ? v : 0.0;
    });
  };
  return outer.integrate(inner) / (2.0 * kPi * kPi);
}

TEST(IndicatorCov, MatchesInversionFormula) {
  // Closed form for the Cauchy box field: X(0) = A + B, X(t) = A + C with
  // independent Cauchy pieces, so Cov = E[F(A)^2] - 1/4 = 1/12 at t = 0.5.
  const double oracle = inversion_cov_stable_box(0.5);
  EXPECT_NEAR(oracle, 1.0 / 12.0, 1e-6);
  const std::size_t n = 40000;
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(n, {{0.5}}));
  EXPECT_NEAR(indicator_cov(s, 0, 0.0, 0.0), oracle, 5.0 / std::sqrt(n));
}

TEST(TestMeasures, ConstructionAndCharBound) {
  const std::vector<double> grid{-10.0, -1.0, 0.0, 0.5, 3.0, 40.0};
  const TestMeasure point(PointMass{0.2});
  EXPECT_NEAR(std::abs(point.char_fn(3.0)), 1.0, 1e-15);
  const TestMeasure disc(Discrete{{-1.0, 0.0, 1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
  EXPECT_NEAR(disc.char_fn(1.0).real(), (1.0 + 2.0 * std::cos(1.0)) / 3.0, 1e-15);
  const TestMeasure gauss(GaussianQuantiles{0.0, 1.0});
  EXPECT_EQ(gauss.atoms().size(), 512u);
  EXPECT_NEAR(gauss.char_fn(1.0).real(), std::exp(-0.5), 2e-3);
  for (const auto* m : {&point, &disc, &gauss}) EXPECT_TRUE(m->char_bounded(grid));
  EXPECT_THROW(TestMeasure(Discrete{{0.0, 1.0}, {0.5, 0.6}}), Rejection);
  EXPECT_THROW(TestMeasure(GaussianQuantiles{0.0, 0.0}), Rejection);
}

TEST(Lemma3, DisjointAndDiagonal) {
  const auto b = kernels::unit_box(1);
  const std::vector<double> far{2.5};
  const auto d = lemma3_gap(b, stable(1.0), far, 1.0, 2.0);
  EXPECT_NEAR(d.gap, 0.0, 1e-12);
  EXPECT_EQ(d.bound, 0.0);
  EXPECT_TRUE(d.satisfied);
  // t = 0, s1 = s2 = 1: gap = |e^{-2} - e^{-2}|... for Cauchy phi_0(1,1) = e^{-2} = phi(1)^2
  const std::vector<double> zero{0.0};
  const auto z = lemma3_gap(b, stable(1.0), zero, 1.0, 1.0);
  EXPECT_NEAR(z.bound, 2.0, 1e-10);
  EXPECT_NEAR(z.gap, 0.0, 1e-12);
  const auto g = lemma3_gap(b, gaussian(), zero, 1.0, 1.0);
  EXPECT_NEAR(g.gap, std::exp(-1.0) - std::exp(-2.0), 1e-12);
  EXPECT_NEAR(g.bound, 1.0, 1e-12);
}

TEST(Lemma3, RandomSweepHasNoViolations) {
  const levy::LevyTriplet cp(0.4, 0.0, levy::LevyMeasure(levy::CompoundPoisson{1.0, {-0.7, 1.3}, {0.5, 0.5}}));
  for (const auto& tr : {stable(0.5), stable(1.5), gaussian(), cp}) {
    const auto r = lemma3_sweep(kernels::tent(1), tr, 100, 9, 2.5);
    EXPECT_EQ(r.violations, 0u) << tr.describe();
    EXPECT_LE(r.max_ratio, 1.0);
  }
}

TEST(Lemma4, DiscreteLhsIsNineTermAverage) {
  const std::size_t n = 20000;
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(n, {{0.8}}));
  const std::vector<double> atoms{-1.0, 0.0, 1.0};
  const TestMeasure mu(Discrete{atoms, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
  double direct = 0.0;
  for (double u : atoms) {
    for (double v : atoms) direct += std::abs(indicator_cov(s, 0, u, v)) / 9.0;
  }
  EXPECT_NEAR(lemma4_lhs(s, 0, mu), direct, 1e-14);
  const TestMeasure point(PointMass{0.0});
  EXPECT_NEAR(lemma4_lhs(s, 0, point), std::abs(indicator_cov(s, 0, 0.0, 0.0)), 1e-15);
}

TEST(Lemma4, BoundHoldsAndMembershipIsEnforced) {
  spectral::ProfileOptions o;
  o.window = 1.5;
  o.t_step = 0.1;
  const auto profile = spectral::SpectralProfile::build(kernels::unit_box(1), stable(1.0), o);
  const auto s = sample_field(kernels::unit_box(1), stable(1.0), config(20000, {{0.8}, {0.2}, {4.0}}, 6.0));
  const TestMeasure point(PointMass{0.0});
  const auto r = lemma4_check(s, 0, point, profile, 0.5);
  EXPECT_NEAR(r.rho_tilde_t, 0.2, 1e-12);
  EXPECT_NEAR(r.rhs, 4.0 * 0.2 / kPi, 1e-6);
  EXPECT_TRUE(r.satisfied);
  EXPECT_THROW(lemma4_check(s, 1, point, profile, 0.5), Rejection);
  const auto indep = lemma4_check(s, 2, point, profile, 0.5);
  EXPECT_EQ(indep.rhs, 0.0);
  EXPECT_LE(indep.lhs, 3.0 / std::sqrt(20000.0));
}

}  // namespace
