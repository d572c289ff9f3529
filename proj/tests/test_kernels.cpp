#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "srd/kernels.hpp"

using namespace srd;
using namespace srd::kernels;

namespace {

double at(const Kernel& k, std::vector<double> x) { return eval(k, x); }

levy::LevyTriplet stable(double alpha) {
  return {0.0, 0.0, levy::LevyMeasure(levy::calibrated_stable(alpha))};
}

TEST(Kernel, PointEvaluation) {
  const auto b = unit_box(1);
  EXPECT_EQ(at(b, {0.5}), 1.0);
  EXPECT_EQ(at(b, {1.5}), 0.0);
  EXPECT_EQ(at(b, {-1e-12}), 0.0);
  EXPECT_DOUBLE_EQ(at(tent(1), {0.25}), 0.75);
  EXPECT_DOUBLE_EQ(at(tent(2), {0.5, -0.5}), 0.25);
  EXPECT_DOUBLE_EQ(at(gaussian_bump(1, 2.0, 3.0), {1.0}), 3.0 * std::exp(-2.0));
  EXPECT_DOUBLE_EQ(at(power_law(1, 2.0), {4.0}), 1.0 / 16.0);
  EXPECT_EQ(at(power_law(1, 2.0), {0.5}), 1.0);
}

TEST(Kernel, IndicatorNormsAreVolumePowers) {
  const auto b2 = unit_box(2);
  EXPECT_NEAR(lp_norm(b2, 0.5).value, 1.0, 1e-12);
  const auto b = box({-0.5, 0.0}, {1.5, 3.0});
  for (double p : {0.25, 0.5, 1.0, 2.0, 3.7}) {
    const double direct = std::pow(6.0, 1.0 / p);
    EXPECT_NEAR(lp_norm(b, p).value, direct, 1e-8 * direct);
  }
}

TEST(Kernel, TentAndGaussianNormsMatchExactIntegrals) {
  // \int (1 - |x|)_+ dx = 1, \int (1 - |x|)^p_+ = 2 / (p + 1)
  EXPECT_NEAR(lp_norm(tent(1), 1.0).value, 1.0, 1e-12);
  EXPECT_NEAR(power_integral(tent(1), 0.5).value, 2.0 / 1.5, 1e-10);
  // \int e^{-2x^2} = sqrt(pi / 2)
  EXPECT_NEAR(lp_norm(gaussian_bump(1), 2.0).value, std::pow(std::numbers::pi / 2.0, 0.25), 1e-10);
  EXPECT_NEAR(power_integral(gaussian_bump(3, 0.5), 1.0).value, std::pow(2.0 * std::numbers::pi, 1.5),
              1e-8);
}

TEST(Kernel, PowerLawIntegralsAndDivergence) {
  // d = 1: 2 + 2 / (p beta - 1)
  EXPECT_NEAR(power_integral(power_law(1, 2.0), 1.0).value, 4.0, 1e-8);
  EXPECT_NEAR(power_integral(power_law(1, 4.0), 0.5).value, 4.0, 1e-8);
  EXPECT_THROW(power_integral(power_law(1, 1.5), 0.5), Rejection);
  EXPECT_THROW(power_integral(power_law(2, 1.0), 2.0), Rejection);
}

TEST(Kernel, NormMonotoneUnderDomination) {
  const auto inner = box({0.2}, {0.7});
  const auto outer = box({0.0}, {1.0});
  const auto tall = box({0.0}, {1.0}, 2.0);
  for (double p : {0.5, 1.0, 2.0}) {
    EXPECT_LE(lp_norm(inner, p).value, lp_norm(outer, p).value);
    EXPECT_LE(lp_norm(outer, p).value, lp_norm(tall, p).value);
  }
}

TEST(Kernel, TabulatedGridInterpolates) {
  const auto path = std::filesystem::temp_directory_path() / "srd_tab_kernel.txt";
  {
    std::ofstream f(path);
    f << "# x value\n0 0\n0.5 1\n1 0\n";
  }
  const auto k = load_tabulated(path, 1);
  EXPECT_DOUBLE_EQ(at(k, {0.25}), 0.5);
  EXPECT_EQ(at(k, {1.5}), 0.0);
  EXPECT_NEAR(power_integral(k, 1.0).value, 0.5, 1e-12);
  std::filesystem::remove(path);
  EXPECT_THROW(load_tabulated(path, 1), Rejection);
}

TEST(Integrability, GaussianBoxPasses) {
  const auto r = check_lambda_integrable(unit_box(1), levy::LevyTriplet(0.0, 1.0, levy::LevyMeasure()));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.drift.value, 0.0);
  EXPECT_NEAR(r.gaussian.value, 1.0, 1e-12);
  EXPECT_EQ(r.jumps.value, 0.0);
}

TEST(Integrability, StableBoxPasses) {
  const auto r = check_lambda_integrable(unit_box(1), stable(1.5));
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(r.inconclusive());
}

TEST(Integrability, HeavyPowerTailFailsJumpCondition) {
  // alpha beta = 0.75 < d = 1
  const auto r = check_lambda_integrable(power_law(1, 0.5), stable(1.5));
  EXPECT_FALSE(r.jumps.finite);
  EXPECT_FALSE(r.passed());
  EXPECT_NE(r.failing().find("jump"), std::string::npos);
  // alpha beta = 1.5 > 1
  EXPECT_TRUE(check_lambda_integrable(power_law(1, 1.0), stable(1.5)).jumps.finite);
}

TEST(Domain, IntersectionOfDisjointSupportsIsEmpty) {
  const auto b = unit_box(1);
  const std::vector<double> far{3.0};
  EXPECT_FALSE(pair_domain(b, far, Combine::Intersection).has_value());
  EXPECT_TRUE(pair_domain(b, far, Combine::Union).has_value());
}

}  // namespace
