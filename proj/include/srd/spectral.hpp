#pragma once

// Spectral quantities of the moving average X(t) = \int f(t - x) Λ(dx):
// σ_f²(s), the characteristic functions of X(0) and (X(t), X(0)), the
// normalized cross integral ρ_t(s1, s2) and its supremum ρ̃_t.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "srd/errors.hpp"
#include "srd/kernels.hpp"
#include "srd/levy.hpp"
#include "srd/quadrature.hpp"

namespace srd::spectral {

using kernels::Kernel;
using levy::LevyTriplet;

struct ComplexEstimate {
  std::complex<double> value;
  double error = 0.0;
};

/// σ_f²(s) = \int Re K(s f(-x)) dx.
Estimate sigma_f_sq(const Kernel& kernel, const LevyTriplet& triplet, double s,
                    const quad::Options& opt = {});

/// φ_{X(0)}(u) = exp(-\int K(u f(x)) dx).
ComplexEstimate char_X0(const Kernel& kernel, const LevyTriplet& triplet, double u,
                        const quad::Options& opt = {});

/// φ_t(s1, s2) = E exp(i (s1 X(t) + s2 X(0))) = exp(-\int K(s1 f(t-x) + s2 f(-x)) dx).
ComplexEstimate char_joint(const Kernel& kernel, const LevyTriplet& triplet,
                           std::span<const double> t, double s1, double s2,
                           const quad::Options& opt = {});

/// \int sqrt(Re K(s1 f(t-x)) Re K(s2 f(-x))) dx, the numerator of ρ_t.
Estimate cross_integral(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
                        double s1, double s2, const quad::Options& opt = {});

/// ρ_t(s1, s2) in [0, 1]. Rejects when σ_f(s1) or σ_f(s2) vanishes; a
/// quadrature overshoot above 1 + 1e-9 is a QuadratureError.
Estimate rho_t(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
               double s1, double s2, const quad::Options& opt = {});

struct SearchOptions {
  double s_min = 1e-3;
  double s_max = 1e3;
  int points = 25;
  int refine_rounds = 3;
  /// Skip the s-independence shortcut and always search.
  bool force_search = false;
  /// The caller asserts ρ_t(s1, s2) does not depend on (s1, s2).
  bool declared_s_independent = false;
};

struct RhoTilde {
  double value = 0.0;
  double error = 0.0;
  double s1 = 1.0;
  double s2 = 1.0;
  /// ρ_t evaluated once because it cannot depend on (s1, s2).
  bool s_independent = false;
  /// Supremum approximated by a boxed grid search: a lower bound of ρ̃_t.
  bool grid_approximate = false;
  std::size_t evaluations = 0;
};

/// ρ̃_t = sup ρ_t(s1, s2), searched over |s1|, |s2| in [s_min, s_max] on a
/// log grid followed by local refinement around the running maximum.
RhoTilde rho_tilde(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
                   const SearchOptions& search = {}, const quad::Options& opt = {});

/// Evaluates ρ_t on the full search grid; used to inspect s-(in)dependence.
std::vector<double> rho_grid(const Kernel& kernel, const LevyTriplet& triplet,
                             std::span<const double> t, const SearchOptions& search = {},
                             const quad::Options& opt = {});

struct ProfileOptions {
  double s_min = 1e-3;
  double s_max = 1e3;
  int s_points = 61;
  double window = 3.0;  // lattice half-width for t
  double t_step = 0.01;
  SearchOptions search;
  unsigned threads = 0;
  quad::Options quad;
};

/// Cached σ_f² on a log s-grid and ρ̃_t on a symmetric lattice of lags.
/// Immutable once built.
class SpectralProfile {
 public:
  static SpectralProfile build(const Kernel& kernel, const LevyTriplet& triplet,
                               const ProfileOptions& options);

  const Kernel& kernel() const noexcept { return kernel_; }
  const LevyTriplet& triplet() const noexcept { return triplet_; }
  const ProfileOptions& options() const noexcept { return options_; }
  int dim() const noexcept { return kernel_.dim(); }

  std::span<const double> s_grid() const noexcept { return s_; }
  std::span<const double> sigma_sq() const noexcept { return sigma_sq_; }
  std::span<const double> sigma_sq_error() const noexcept { return sigma_err_; }

  /// σ_f²(s) computed on demand with the profile's quadrature options.
  Estimate sigma_sq_at(double s) const;

  /// Lattice t = k * t_step, k in [-M, M]^d.
  int half_count() const noexcept { return half_count_; }
  double t_step() const noexcept { return step_; }
  double cell_volume() const;
  std::size_t t_count() const noexcept { return rho_.size(); }
  std::span<const double> t_point(std::size_t i) const;
  /// Sup-norm lattice radius max_k |k_j| of point i.
  int shell(std::size_t i) const noexcept { return shell_[i]; }
  std::span<const double> rho_tilde() const noexcept { return rho_; }
  std::span<const double> rho_tilde_error() const noexcept { return rho_err_; }

  bool s_independent() const noexcept { return s_independent_; }
  bool grid_approximate() const noexcept { return grid_approximate_; }

  /// CSV rows (s, sigma_sq, err).
  void write_sigma_csv(std::ostream& os) const;
  /// CSV rows (t_1, ..., t_d, rho_tilde, err).
  void write_rho_csv(std::ostream& os) const;

 private:
  SpectralProfile(Kernel k, LevyTriplet t, ProfileOptions o)
      : kernel_(std::move(k)), triplet_(std::move(t)), options_(std::move(o)) {}

  Kernel kernel_;
  LevyTriplet triplet_;
  ProfileOptions options_;
  std::vector<double> s_;
  std::vector<double> sigma_sq_;
  std::vector<double> sigma_err_;
  int half_count_ = 0;
  double step_ = 0.0;
  std::vector<double> t_points_;
  std::vector<int> shell_;
  std::vector<double> rho_;
  std::vector<double> rho_err_;
  bool s_independent_ = false;
  bool grid_approximate_ = false;
};

}  // namespace srd::spectral
