#pragma once

// Moving-average kernels f: R^d -> R (d = 1, 2, 3) with support metadata,
// L^p norms and the Λ-integrability conditions.

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "srd/errors.hpp"
#include "srd/levy.hpp"
#include "srd/quadrature.hpp"

namespace srd::kernels {

/// f vanishes outside the closed box [lo, hi].
struct BoundedBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// |f(x)| <= constant * |x|^{-exponent} for |x| > radius.
struct PowerDecay {
  double radius = 1.0;
  double constant = 1.0;
  double exponent = 1.0;
};

/// |f(x)| <= constant * exp(-rate |x|^2).
struct GaussianDecay {
  double constant = 1.0;
  double rate = 1.0;
};

using Support = std::variant<BoundedBox, PowerDecay, GaussianDecay>;

class Kernel {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;
  /// Closed form of \int |f|^p, when known for that p.
  using PowerIntegral = std::function<std::optional<double>(double)>;

  Kernel(std::string name, int dim, Evaluator f, Support support,
         std::vector<std::vector<double>> breaks, PowerIntegral closed_form = {},
         bool continuous = true);

  /// f(x); exactly 0 outside a bounded-box support.
  double operator()(std::span<const double> x) const;

  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const Support& support() const noexcept { return support_; }
  bool bounded() const noexcept { return std::holds_alternative<BoundedBox>(support_); }

  /// Support edges and kinks along one axis, ascending. The integrand
  /// x -> g(f(x)) is assumed smooth between consecutive entries.
  const std::vector<double>& breaks(int axis) const { return breaks_.at(axis); }

  std::optional<double> closed_form_power_integral(double p) const;

  /// Metadata only; continuity is assumed, not verified.
  bool continuous() const noexcept { return continuous_; }

  /// Largest per-axis extent hi - lo of a bounded support (infinity otherwise).
  double support_diameter() const;

 private:
  std::string name_;
  int dim_;
  Evaluator f_;
  Support support_;
  std::vector<std::vector<double>> breaks_;
  PowerIntegral closed_form_;
  bool continuous_;
};

/// amplitude * indicator of the closed box [lo, hi].
Kernel box(std::vector<double> lo, std::vector<double> hi, double amplitude = 1.0);
/// Indicator of [0, 1]^dim.
Kernel unit_box(int dim);
/// amplitude * prod_k (1 - |x_k| / width)_+.
Kernel tent(int dim, double width = 1.0, double amplitude = 1.0);
/// amplitude * exp(-rate |x|^2).
Kernel gaussian_bump(int dim, double rate = 1.0, double amplitude = 1.0);
/// amplitude * min(1, |x|^{-beta}).
Kernel power_law(int dim, double beta, double amplitude = 1.0);
/// Multilinear interpolation on a rectilinear grid; zero outside it.
/// values are row-major with the last axis fastest.
Kernel tabulated(std::vector<std::vector<double>> axes, std::vector<double> values);
/// Reads rows "x_1 ... x_d value" (blank lines and # comments skipped).
Kernel load_tabulated(const std::filesystem::path& path, int dim);

double eval(const Kernel& kernel, std::span<const double> x);

/// \int |f|^p with an absolute error estimate.
Estimate power_integral(const Kernel& kernel, double p, const quad::Options& opt = {});
/// ||f||_p = (\int |f|^p)^{1/p}.
Estimate lp_norm(const Kernel& kernel, double p, const quad::Options& opt = {});

struct IntegrabilityCondition {
  bool finite = false;
  bool inconclusive = false;
  double value = 0.0;
  double error = 0.0;
};

struct IntegrabilityReport {
  IntegrabilityCondition drift;     // \int |f| |a0 + \int (1{|yf|<=1} - 1{|y|<=1}) y nu(dy)| dx
  IntegrabilityCondition gaussian;  // b0^2 \int f^2
  IntegrabilityCondition jumps;     // \int\int min(1, y^2 f^2) nu(dy) dx

  bool passed() const { return drift.finite && gaussian.finite && jumps.finite; }
  bool inconclusive() const {
    return drift.inconclusive || gaussian.inconclusive || jumps.inconclusive;
  }
  /// Name of the first condition that is infinite or inconclusive, empty if none.
  std::string failing() const;
};

IntegrabilityReport check_lambda_integrable(const Kernel& kernel, const levy::LevyTriplet& triplet,
                                            const quad::Options& opt = {});

/// Integration domain for x -> g(f(x)).
std::vector<quad::Axis> domain(const Kernel& kernel);

enum class Combine { Union, Intersection };

/// Integration domain for x -> h(f(t - x), f(-x)). With Intersection the
/// domain covers only points where both factors can be nonzero; nullopt
/// means that set is empty.
std::optional<std::vector<quad::Axis>> pair_domain(const Kernel& kernel, std::span<const double> t,
                                                   Combine mode);

}  // namespace srd::kernels
