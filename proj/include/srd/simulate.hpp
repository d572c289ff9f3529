#pragma once

// Monte Carlo sampling of X(t) = \int f(t - x) Λ(dx) by a Riemann sum over
// lattice cells, and empirical checks of the SRD definition and the
// covariance bounds.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "srd/kernels.hpp"
#include "srd/levy.hpp"
#include "srd/spectral.hpp"

namespace srd::simulate {

using kernels::Kernel;
using levy::LevyTriplet;

struct SimConfig {
  double h = 0.01;       // cell side
  double window = 3.0;   // cells tile [-W, W]^d
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::vector<std::vector<double>> lags;
  unsigned threads = 0;
};

/// Throws Rejection unless h <= W, 2W/h is an integer, and the support of
/// f(t - .) for t in {0} and every lag sits inside the window with a margin
/// of one support diameter (decay kernels: 2 effective radii).
void validate(const SimConfig& config, const Kernel& kernel);

/// N rows of (X(0), X(t_1), ..., X(t_L)), row-major.
struct FieldSample {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  SimConfig config;
  std::string kernel;
  std::string triplet;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  /// CSV with header x0, x1, ...
  void write_csv(std::ostream& os) const;
};

/// Deterministic given config.seed. Replication r draws from
/// CounterRng(seed, r), so the result does not depend on the thread count.
/// Tabulated Lévy measures are rejected.
FieldSample sample_field(const Kernel& kernel, const LevyTriplet& triplet,
                         const SimConfig& config);

/// Standard symmetric α-stable variate with E exp(isZ) = exp(-|s|^α)
/// (Chambers-Mallows-Stuck) from two open uniforms.
double symmetric_stable(double alpha, double u1, double u2);

/// (1/N) Σ exp(i(s1 X_k(t_lag) + s2 X_k(0))); lag indexes the lag list.
std::complex<double> empirical_char(const FieldSample& sample, double s1, double s2,
                                    std::size_t lag);
/// (1/N) Σ exp(i s X_k(0)).
std::complex<double> empirical_char_X0(const FieldSample& sample, double s);

/// Empirical Cov(1{X(t_lag) > u}, 1{X(0) > v}).
double indicator_cov(const FieldSample& sample, std::size_t lag, double u, double v);

struct PointMass {
  double at = 0.0;
};
struct Discrete {
  std::vector<double> atoms;
  std::vector<double> weights;
};
struct GaussianQuantiles {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Probability measure μ on R used as the integrating measure in the SRD
/// definition, represented by finitely many weighted atoms. The Gaussian
/// variant is the 512-point table of quantiles at (k + 1/2)/512.
class TestMeasure {
 public:
  using Variant = std::variant<PointMass, Discrete, GaussianQuantiles>;
  static constexpr std::size_t kQuantilePoints = 512;

  explicit TestMeasure(Variant v);

  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::string describe() const;
  /// μ̂(s) = Σ w_k exp(i s a_k).
  std::complex<double> char_fn(double s) const;
  /// |μ̂(s)| <= 1 + 1e-12 at every grid point.
  bool char_bounded(std::span<const double> grid) const;

 private:
  Variant v_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

struct Lemma3Result {
  double gap = 0.0;    // |φ_t(s1, s2) - φ(s1) φ(s2)|
  double bound = 0.0;  // exp(-\int (√ReK(s1 f(t-x)) - √ReK(s2 f(-x)))² dx) * 2 \int √(ReK ReK) dx
  bool satisfied = false;
};

Lemma3Result lemma3_gap(const Kernel& kernel, const LevyTriplet& triplet,
                        std::span<const double> t, double s1, double s2,
                        const quad::Options& opt = {});

struct Lemma3Sweep {
  std::size_t draws = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max gap / (bound + 1e-8)
};

/// Random t with |t_k| <= t_max and s1, s2 = ±10^{U(-2, 2)}.
Lemma3Sweep lemma3_sweep(const Kernel& kernel, const LevyTriplet& triplet, std::size_t draws,
                         std::uint64_t seed, double t_max, const quad::Options& opt = {});

struct Lemma4Result {
  double lhs = 0.0;  // \int\int |Cov(1{X(t)>u}, 1{X(0)>v})| μ(du) μ(dv), Monte Carlo
  double lhs_se = 0.0;
  double rhs = 0.0;  // (2/π²) (theorem integral)² ρ̃_t
  double rho_tilde_t = 0.0;
  double theorem_integral = 0.0;
  bool satisfied = false;  // lhs <= rhs + 3 se
};

/// lhs over μ⊗μ for the lag column `lag` of `sample`. The standard error
/// comes from 20 batch means.
double lemma4_lhs(const FieldSample& sample, std::size_t lag, const TestMeasure& mu,
                  double* standard_error = nullptr);

/// Rejects when the lag is not in A_ρ̄ = {t : ρ̃_t <= ρ̄} or the sample was
/// drawn for a different kernel.
Lemma4Result lemma4_check(const FieldSample& sample, std::size_t lag, const TestMeasure& mu,
                          const spectral::SpectralProfile& profile, double rho_bar);

}  // namespace srd::simulate
