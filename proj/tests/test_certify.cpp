#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "srd/certify.hpp"
#include "srd/csv.hpp"

using namespace srd;
using namespace srd::certify;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

levy::LevyTriplet stable(double alpha) {
  return {0.0, 0.0, levy::LevyMeasure(levy::calibrated_stable(alpha))};
}

spectral::ProfileOptions coarse(double window = 3.0, double step = 0.01) {
  spectral::ProfileOptions o;
  o.window = window;
  o.t_step = step;
  return o;
}

TEST(ChooseRhoBar, TentExceedanceRegion) {
  const auto p = SpectralProfile::build(kernels::unit_box(1), stable(1.0), coarse());
  const std::vector<double> cands{0.5};
  const auto c = choose_rho_bar(p, cands);
  ASSERT_TRUE(c.found);
  EXPECT_EQ(c.rho_bar, 0.5);
  // {t : 1 - |t| > 0.5} = (-0.5, 0.5); the lattice count misses one cell.
  EXPECT_EQ(c.exceedance_count, 99u);
  EXPECT_NEAR(c.ac_measure, 1.0, 0.01 + 1e-12);
  EXPECT_EQ(c.method, "grid-count");
}

TEST(ChooseRhoBar, DisjointSupportBeyondTwo) {
  // tent of width 1: support [-1, 1], so rho_tilde_t = 0 for |t| >= 2
  const auto p = SpectralProfile::build(kernels::tent(1), stable(1.0), coarse(3.0, 0.05));
  const std::vector<double> cands{0.99};
  const auto c = choose_rho_bar(p, cands);
  ASSERT_TRUE(c.found);
  EXPECT_LE(c.ac_measure, 4.0);
}

TEST(ChooseRhoBar, SmallestFeasibleIsChosenAndAllRecorded) {
  const auto p = SpectralProfile::build(kernels::unit_box(1), stable(1.0), coarse(3.0, 0.05));
  const std::vector<double> cands{0.9, 0.25, 0.5};
  const auto c = choose_rho_bar(p, cands);
  EXPECT_EQ(c.rho_bar, 0.25);
  EXPECT_EQ(c.feasible.size(), 3u);
  EXPECT_THROW(choose_rho_bar(p, std::vector<double>{1.0}), Rejection);
}

TEST(ChooseRhoBar, WindowTooSmallIsInfeasible) {
  // window 0.5 < support diameter: rho_tilde exceeds every candidate on the outer shell
  const auto p = SpectralProfile::build(kernels::unit_box(1), stable(1.0), coarse(0.3, 0.05));
  const std::vector<double> cands{0.5};
  EXPECT_FALSE(choose_rho_bar(p, cands).found);
}

TEST(TheoremIntegral, StableClosedForm) {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto p = SpectralProfile::build(kernels::unit_box(1), stable(alpha), coarse(1.5, 0.5));
    const auto ti = theorem_integral(p, 0.5);
    const double want = kSqrtPi / (alpha * std::sqrt(0.5));
    EXPECT_FALSE(ti.divergent);
    EXPECT_NEAR(ti.value, want, 1e-4 * want) << "alpha=" << alpha;
    EXPECT_LT(ti.relative_error(), 1e-3);
  }
}

TEST(TheoremIntegral, IndependentOfKernelNorm) {
  // sigma_f^2 = 2|s| for box amplitude 2, alpha = 1; the value does not move.
  const auto p = SpectralProfile::build(kernels::box({0.0}, {1.0}, 2.0), stable(1.0), coarse(1.5, 0.5));
  EXPECT_NEAR(theorem_integral(p, 0.5).value, std::sqrt(2.0 * std::numbers::pi), 1e-4);
}

TEST(TheoremIntegral, GaussianClosedForm) {
  const levy::LevyTriplet g(0.0, 1.0, levy::LevyMeasure());
  const auto p = SpectralProfile::build(kernels::unit_box(1), g, coarse(1.5, 0.5));
  const double want = 0.5 * std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(theorem_integral(p, 0.5).value, want, 1e-4 * want);
}

TEST(TheoremIntegral, IncreasesWithRhoBar) {
  const auto p = SpectralProfile::build(kernels::tent(1), stable(1.2), coarse(2.5, 0.5));
  double prev = 0.0;
  for (double rb = 0.1; rb < 0.95; rb += 0.1) {
    const double v = theorem_integral(p, rb).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(theorem_integral(p, 1.0), Rejection);
}

TEST(TheoremIntegral, BoundedSigmaDiverges) {
  const levy::LevyTriplet cp(0.0, 0.0, levy::LevyMeasure(levy::CompoundPoisson{1.0, {1.0}, {1.0}}));
  auto o = coarse(1.5, 0.5);
  o.search.declared_s_independent = true;
  const auto p = SpectralProfile::build(kernels::unit_box(1), cp, o);
  const auto ti = theorem_integral(p, 0.5);
  EXPECT_TRUE(ti.divergent);
}

TEST(SrdIntegral, TentIntegralForBox) {
  const auto p = SpectralProfile::build(kernels::unit_box(1), stable(1.0), coarse());
  const auto s = srd_integral(p);
  EXPECT_NEAR(s.value, 1.0, 1e-10);
  EXPECT_EQ(s.tail, 0.0);
  ASSERT_TRUE(s.fubini_value.has_value());
  EXPECT_NEAR(*s.fubini_value, 1.0, 1e-10);
}

TEST(SrdIntegral, AgreesWithFubiniForDecayingKernel) {
  // power kernel beta = 4, alpha = 1: (\int |f|^{1/2})^2 / \int |f| = 6
  const auto p = SpectralProfile::build(kernels::power_law(1, 4.0), stable(1.0), coarse(50.0, 0.1));
  const auto s = srd_integral(p);
  ASSERT_TRUE(s.fubini_value.has_value());
  EXPECT_NEAR(*s.fubini_value, 6.0, 1e-8);
  EXPECT_FALSE(s.divergent);
  EXPECT_NEAR(s.value, *s.fubini_value, 1e-3 * *s.fubini_value);
  EXPECT_GT(s.tail, 0.0);
  EXPECT_LT(s.tail_share(), 0.05);
}

TEST(SrdIntegral, DivergesOutsideHalfAlphaSpace) {
  const auto p = SpectralProfile::build(kernels::power_law(1, 1.5), stable(1.0), coarse(20.0, 0.05));
  const auto s = srd_integral(p);
  EXPECT_TRUE(s.divergent);
  ASSERT_TRUE(s.tail_exponent.has_value());
  EXPECT_GE(*s.tail_exponent, -1.0);
  EXPECT_TRUE(std::isinf(*s.fubini_value));
}

TEST(Certify, ExampleConfigurationCertifies) {
  const auto r = certify::certify(kernels::unit_box(1), stable(1.0), {});
  EXPECT_EQ(r.verdict, Verdict::CertifiedSrd);
  EXPECT_TRUE(r.reasons.empty());
  EXPECT_TRUE(r.s_independent);
}

TEST(Certify, CounterConfigurationIsInconclusive) {
  CertifyConfig c;
  c.profile = coarse(20.0, 0.05);
  const auto r = certify::certify(kernels::power_law(1, 1.5), stable(1.0), c);
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
  EXPECT_TRUE(r.srd.divergent);
  EXPECT_EQ(to_string(r.verdict), "inconclusive");
}

TEST(Certify, Rejections) {
  EXPECT_THROW(certify::certify(kernels::box({0.0}, {1.0}, 0.0), stable(1.0), {}), Rejection);
  // alpha beta < d: not Lambda-integrable
  EXPECT_THROW(certify::certify(kernels::power_law(1, 0.5), stable(1.5), {}), Rejection);
}

TEST(Certify, LargerWindowKeepsVerdict) {
  for (double w : {2.0, 3.0, 5.0}) {
    CertifyConfig c;
    c.profile = coarse(w, 0.05);
    EXPECT_EQ(certify::certify(kernels::unit_box(1), stable(1.0), c).verdict, Verdict::CertifiedSrd);
  }
}

TEST(Certify, ReportCsvRoundTrips) {
  const auto r = certify::certify(kernels::unit_box(1), stable(1.0), {});
  std::stringstream ss;
  write_report_csv(ss, r);
  const auto t = csv::read(ss);
  ASSERT_EQ(t.header, (std::vector<std::string>{"quantity", "value"}));
  bool seen = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0] == "theorem_integral") {
      EXPECT_EQ(t.number(i, "value"), r.theorem.value);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
  std::ostringstream text;
  write_report_text(text, r);
  EXPECT_NE(text.str().find("certified-SRD"), std::string::npos);
}

}  // namespace
