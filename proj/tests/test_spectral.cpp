#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "srd/csv.hpp"
#include "srd/spectral.hpp"

using namespace srd;
using namespace srd::spectral;

namespace {

using V = std::vector<double>;

levy::LevyTriplet stable(double alpha) {
  return {0.0, 0.0, levy::LevyMeasure(levy::calibrated_stable(alpha))};
}
levy::LevyTriplet gaussian() { return {0.0, 1.0, levy::LevyMeasure()}; }
levy::LevyTriplet compound() {
  return {0.2, 0.0, levy::LevyMeasure(levy::CompoundPoisson{2.0, {-1.0, 0.5, 2.0}, {0.25, 0.5, 0.25}})};
}

TEST(Sigma, StableIdentity) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (double s : {0.1, 1.0, 10.0}) {
      const double want = std::pow(s, alpha);
      EXPECT_NEAR(sigma_f_sq(kernels::unit_box(1), stable(alpha), s).value, want, 1e-10 * want);
      // ||tent||_alpha^alpha = 2 / (alpha + 1)
      EXPECT_NEAR(sigma_f_sq(kernels::tent(1), stable(alpha), s).value, want * 2.0 / (alpha + 1.0),
                  1e-8 * want);
    }
  }
  EXPECT_EQ(sigma_f_sq(kernels::unit_box(1), stable(1.0), 0.0).value, 0.0);
}

TEST(Sigma, GaussianHandFormula) {
  EXPECT_NEAR(sigma_f_sq(kernels::unit_box(1), gaussian(), 2.0).value, 2.0, 1e-12);
}

TEST(CharX0, ClosedFormsAndSymmetry) {
  const auto b = kernels::unit_box(1);
  EXPECT_EQ(char_X0(b, stable(1.0), 0.0).value, std::complex<double>(1.0, 0.0));
  EXPECT_NEAR(char_X0(b, gaussian(), 1.0).value.real(), std::exp(-0.5), 1e-12);
  const auto sym = char_X0(kernels::tent(1), stable(1.3), 2.0).value;
  EXPECT_LE(std::abs(sym.imag()), 1e-10);
}

TEST(CharX0, SigmaIsMinusLogModulus) {
  for (const auto& tr : {stable(0.7), gaussian(), compound()}) {
    for (double s : {0.3, 1.0, 2.5}) {
      const auto k = kernels::gaussian_bump(1);
      const double sig = sigma_f_sq(k, tr, s).value;
      const double from_char = -std::log(std::abs(char_X0(k, tr, s).value));
      EXPECT_NEAR(sig, from_char, 1e-8 * sig) << tr.describe() << " s=" << s;
    }
  }
}

TEST(CharJoint, ReducesToMarginalAndFactorizes) {
  const auto b = kernels::unit_box(1);
  const V t{0.4};
  const auto tr = compound();
  const auto j = char_joint(b, tr, t, 0.0, 1.3).value;
  const auto m = char_X0(b, tr, 1.3).value;
  EXPECT_NEAR(std::abs(j - m), 0.0, 1e-12);
  const V far{2.5};
  const auto jf = char_joint(b, tr, far, 0.7, -1.1).value;
  const auto prod = char_X0(b, tr, 0.7).value * char_X0(b, tr, -1.1).value;
  EXPECT_LE(std::abs(jf - prod), 1e-8);
}

TEST(CharJoint, MatchesDenseRiemannSum) {
  // Stable alpha = 1, unit box, t = 0.5, s1 = s2 = 1; the oracle is a
  // midpoint sum over 4e5 cells of [-1, 0.5].
  const auto tr = stable(1.0);
  const auto b = kernels::unit_box(1);
  const V t{0.5};
  const int n = 400000;
  const double h = 1.5 / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + (i + 0.5) * h;
    const double u = (x >= -0.5 && x <= 0.5 ? 1.0 : 0.0) + (x >= -1.0 && x <= 0.0 ? 1.0 : 0.0);
    acc += std::abs(u) * h;  // Re K(u) = |u| for the calibrated Cauchy triplet
  }
  const auto j = char_joint(b, tr, t, 1.0, 1.0).value;
  EXPECT_NEAR(j.real(), std::exp(-acc), 1e-6);
  EXPECT_NEAR(j.imag(), 0.0, 1e-10);
}

TEST(Rho, DiagonalAndDisjointValues) {
  const auto k = kernels::gaussian_bump(1);
  const V zero{0.0};
  for (const auto& tr : {stable(1.2), gaussian(), compound()}) {
    EXPECT_NEAR(rho_t(k, tr, zero, 0.8, 0.8).value, 1.0, 1e-9);
  }
  const V far{3.0};
  EXPECT_EQ(rho_t(kernels::unit_box(1), compound(), far, 1.0, 2.0).value, 0.0);
  EXPECT_THROW(rho_t(k, stable(1.0), zero, 0.0, 1.0), Rejection);
}

TEST(Rho, EvenInEachArgument) {
  const auto k = kernels::tent(1);
  const V t{0.3};
  const auto tr = compound();
  const double base = rho_t(k, tr, t, 0.7, 1.9).value;
  EXPECT_EQ(rho_t(k, tr, t, -0.7, 1.9).value, base);
  EXPECT_EQ(rho_t(k, tr, t, 0.7, -1.9).value, base);
  EXPECT_EQ(rho_t(k, tr, t, -0.7, -1.9).value, base);
}

TEST(Rho, StableIsConstantAndEqualsOverlap) {
  SearchOptions grid;
  grid.points = 9;
  const auto b = kernels::unit_box(1);
  for (double t0 : {0.0, 0.25, 0.4, 0.9}) {
    const V t{t0};
    const auto vals = rho_grid(b, stable(1.0), t, grid);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    EXPECT_LE(*hi - *lo, 1e-8);
    EXPECT_NEAR(*hi, 1.0 - t0, 1e-10);
  }
  // tent, alpha = 1: \int sqrt(f(t-x) f(-x)) dx / ||f||_1, compared with
  // the Riemann-sum value of the same integral.
  const V t{0.5};
  const auto k = kernels::tent(1);
  const int n = 200000;
  const double h = 3.0 / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.5 + (i + 0.5) * h;
    const double a = std::max(0.0, 1.0 - std::abs(0.5 - x));
    const double c = std::max(0.0, 1.0 - std::abs(x));
    acc += std::sqrt(a * c) * h;
  }
  EXPECT_NEAR(rho_t(k, stable(1.0), t, 2.0, 0.5).value, acc, 1e-6);
}

TEST(Rho, CauchySchwarzOnEveryEvaluation) {
  const auto k = kernels::gaussian_bump(1);
  for (const auto& tr : {stable(0.6), gaussian(), compound()}) {
    for (double t0 : {0.0, 0.7, 2.0}) {
      for (double s1 : {0.1, 1.0, 8.0}) {
        for (double s2 : {0.3, 5.0}) {
          const V t{t0};
          const double num = cross_integral(k, tr, t, s1, s2).value;
          const double bound = std::sqrt(sigma_f_sq(k, tr, s1).value * sigma_f_sq(k, tr, s2).value);
          EXPECT_LE(num, bound * (1.0 + 1e-9));
        }
      }
    }
  }
}

TEST(RhoTilde, StableShortcutAndSearch) {
  const auto b = kernels::unit_box(1);
  const V t{0.4};
  const auto fast = rho_tilde(b, stable(1.0), t);
  EXPECT_TRUE(fast.s_independent);
  EXPECT_NEAR(fast.value, 0.6, 1e-12);
  SearchOptions forced;
  forced.force_search = true;
  forced.points = 7;
  forced.refine_rounds = 1;
  const auto searched = rho_tilde(b, stable(1.0), t, forced);
  EXPECT_TRUE(searched.grid_approximate);
  EXPECT_NEAR(searched.value, 0.6, 1e-10);
  EXPECT_NEAR(rho_tilde(b, stable(1.0), V{0.0}).value, 1.0, 1e-12);
  EXPECT_EQ(rho_tilde(b, stable(1.0), V{2.0}).value, 0.0);
}

TEST(RhoTilde, SearchFindsAtLeastTheDiagonalForNonHomogeneous) {
  SearchOptions opt;
  opt.points = 7;
  opt.refine_rounds = 1;
  const auto k = kernels::tent(1);
  const V t{0.3};
  const auto r = rho_tilde(k, compound(), t, opt);
  EXPECT_TRUE(r.grid_approximate);
  EXPECT_GE(r.value + 1e-12, rho_t(k, compound(), t, 1.0, 1.0).value);
  EXPECT_LE(r.value, 1.0);
}

TEST(Profile, ShapeCsvAndRejection) {
  ProfileOptions o;
  o.window = 1.5;
  o.t_step = 0.25;
  o.s_points = 9;
  const auto p = SpectralProfile::build(kernels::unit_box(1), stable(1.0), o);
  EXPECT_EQ(p.half_count(), 6);
  EXPECT_EQ(p.t_count(), 13u);
  for (std::size_t i = 0; i < p.t_count(); ++i) {
    EXPECT_NEAR(p.rho_tilde()[i], std::max(0.0, 1.0 - std::abs(p.t_point(i)[0])), 1e-12);
  }
  std::stringstream ss;
  p.write_rho_csv(ss);
  const auto table = csv::read(ss);
  ASSERT_EQ(table.rows.size(), 13u);
  EXPECT_EQ(table.number(3, table.header[1]), p.rho_tilde()[3]);
  std::stringstream sg;
  p.write_sigma_csv(sg);
  const auto st = csv::read(sg);
  EXPECT_EQ(st.rows.size(), 9u);
  EXPECT_EQ(st.number(4, st.header[1]), p.sigma_sq()[4]);

  EXPECT_THROW(SpectralProfile::build(kernels::box({0.0}, {1.0}, 0.0), stable(1.0), o), Rejection);
}

}  // namespace
