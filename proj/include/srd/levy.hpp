#pragma once

// Lévy characteristics (a0, b0, nu0) of a stationary independently scattered
// ID random measure, and its cumulant function
//
//   K(s) = -i s a0 + s^2 b0 / 2 - \int (e^{isy} - 1 - i s y 1{|y|<=1}) nu0(dy).
//
// Re K is even and nonnegative; it is always evaluated on |s|.
//
// Re K(s) = psi(s^2) for a Bernstein function psi. Nothing here uses that
// representation.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "srd/errors.hpp"
#include "srd/quadrature.hpp"

namespace srd::levy {

struct NoJumps {};

/// nu0(dy) = scale * |y|^{-1-alpha} dy.
struct SymmetricStable {
  double alpha = 1.0;
  double scale = 1.0;
};

/// nu0 = rate * sum_k weight_k * delta_{atom_k}.
struct CompoundPoisson {
  double rate = 1.0;
  std::vector<double> atoms;
  std::vector<double> weights;
};

/// Density of nu0 sampled on a log-spaced grid symmetric about zero. The
/// density is interpolated log-log between nodes, extrapolated as a power
/// law down to |y| = kInnerCutoff, and taken as zero beyond the outermost
/// node.
struct Tabulated {
  static constexpr double kInnerCutoff = 1e-8;
  std::vector<double> radii;     // ascending positive nodes
  std::vector<double> positive;  // density at +radii[i]
  std::vector<double> negative;  // density at -radii[i]
};

class LevyMeasure {
 public:
  using Variant = std::variant<NoJumps, SymmetricStable, CompoundPoisson, Tabulated>;

  LevyMeasure() = default;
  explicit LevyMeasure(Variant v);

  /// Builds a tabulated measure from (y, density) rows. The y values must
  /// form a log-spaced grid symmetric about 0 that excludes 0.
  static LevyMeasure tabulated(std::vector<std::pair<double, double>> rows);

  const Variant& variant() const noexcept { return v_; }
  bool is_none() const noexcept { return std::holds_alternative<NoJumps>(v_); }
  std::string describe() const;

  /// -\int (e^{isy} - 1 - i s y 1{|y|<=1}) nu0(dy), i.e. the jump part of K(s).
  std::complex<double> jump_exponent(double s, const quad::Options& opt = {}) const;

  /// \int min(1, y^2 u^2) nu0(dy).
  double small_big(double u) const;

  /// \int (1{|y u| <= 1} - 1{|y| <= 1}) y nu0(dy).
  double compensation(double u) const;

  /// Limit of compensation(u) as u -> 0; the drift correction far out in
  /// a kernel's tail.
  double tail_compensation() const;

  /// True when every jump is bounded (|y| <= some finite value).
  bool bounded_jumps() const noexcept;

 private:
  Variant v_{NoJumps{}};
};

struct LevyTriplet {
  double drift = 0.0;     // a0
  double gaussian = 0.0;  // b0
  LevyMeasure measure;

  LevyTriplet() = default;
  LevyTriplet(double a0, double b0, LevyMeasure nu);

  std::string describe() const;
};

struct CumulantValue {
  double re = 0.0;
  double im = 0.0;
  std::complex<double> complex() const { return {re, im}; }
};

/// 2 Γ(1-α) cos(πα/2) / α (π at α = 1): Re K(s) = scale * C_α |s|^α for the
/// symmetric stable measure.
double stable_constant(double alpha);

/// Stable measure whose scale makes Re K(1) = 1.
SymmetricStable calibrated_stable(double alpha);

CumulantValue eval_K(const LevyTriplet& triplet, double s, const quad::Options& opt = {});
double eval_ReK(const LevyTriplet& triplet, double s, const quad::Options& opt = {});

/// p when Re K(s) = C |s|^p for all s (pure Gaussian: 2, pure symmetric
/// stable without Gaussian part: alpha). In that case ρ_t(s1, s2) does not
/// depend on (s1, s2).
std::optional<double> homogeneity_exponent(const LevyTriplet& triplet);

struct NegdefReport {
  std::size_t samples = 0;
  std::size_t nonnegative = 0;     // Re ψ >= 0
  std::size_t hermitian = 0;       // ψ(x) = conj ψ(-x)
  std::size_t complex_bound = 0;   // |ψ(x)+ψ(±y)-ψ(x±y)| <= 2√Reψ(x)√Reψ(y)
  std::size_t real_bound = 0;      // same for real parts
  std::size_t lower_bound = 0;     // Reψ(x+y) ∧ Re(ψ(x)+ψ(y)) >= (√Reψ(x) - √Reψ(y))²
  double max_excess = 0.0;         // largest violation divided by its tolerance scale

  std::size_t violations() const {
    return nonnegative + hermitian + complex_bound + real_bound + lower_bound;
  }
};

/// Evaluates the negative definite function inequalities for ψ = K on
/// n_samples heavy-tailed random pairs (x, y). Tolerance for each check is
/// 1e-9 * (1 + |ψ(x)| + |ψ(y)| + |ψ(x+y)| + |ψ(x-y)|).
NegdefReport check_negdef_inequalities(const LevyTriplet& triplet, std::size_t n_samples,
                                       std::uint64_t seed);

}  // namespace srd::levy
