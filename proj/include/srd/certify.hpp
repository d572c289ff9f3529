#pragma once

// Sufficient short-range-dependence certificate: choose a threshold ρ̄ < 1
// with a bounded exceedance set {t : ρ̃_t > ρ̄}, check
//   \int_0^inf σ_f(s)/s exp(-(1-ρ̄) σ_f²(s)) ds < inf
// and \int ρ̃_t dt < inf. The verdict is certified-SRD or inconclusive; the
// condition is only sufficient, so long-range dependence is never claimed.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srd/kernels.hpp"
#include "srd/levy.hpp"
#include "srd/spectral.hpp"

namespace srd::certify {

using spectral::SpectralProfile;

struct RhoBarChoice {
  bool found = false;
  double rho_bar = 0.0;
  /// Lattice cell volume times the number of lattice points with ρ̃_t > ρ̄.
  double ac_measure = 0.0;
  std::size_t exceedance_count = 0;
  std::string method = "grid-count";
  /// Every candidate whose exceedance set stays strictly inside the window.
  std::vector<double> feasible;
};

/// Smallest candidate whose exceedance region avoids the outermost lattice
/// shell, provided ρ̃_t does not increase from the next-to-last shell to the
/// last one.
RhoBarChoice choose_rho_bar(const SpectralProfile& profile, std::span<const double> candidates);

struct TheoremIntegral {
  double value = 0.0;
  double error = 0.0;
  bool divergent = false;
  std::string divergence;
  double endpoint_part = 0.0;  // (0, s_min], power-law fit of σ_f²
  double middle_part = 0.0;    // [s_min, s_max], adaptive quadrature
  double tail_part = 0.0;      // [s_max, inf), power-law fit of σ_f²
  double low_exponent = 0.0;   // fitted σ_f² ~ s^p near 0
  double high_exponent = 0.0;  // fitted σ_f² ~ s^p near s_max

  double relative_error() const { return value > 0.0 ? error / value : 0.0; }
};

TheoremIntegral theorem_integral(const SpectralProfile& profile, double rho_bar);

struct SrdIntegral {
  double value = 0.0;
  double lattice_sum = 0.0;
  double tail = 0.0;
  double error = 0.0;
  bool divergent = false;
  std::string tail_method;
  std::optional<double> tail_exponent;
  /// For homogeneous cumulants (Re K = C|s|^p): ||f||_{p/2}^p / ||f||_p^p,
  /// the exact value of \int ρ̃_t dt.
  std::optional<double> fubini_value;

  double tail_share() const { return value > 0.0 ? tail / value : 0.0; }
};

SrdIntegral srd_integral(const SpectralProfile& profile);

enum class Verdict { CertifiedSrd, Inconclusive };

std::string to_string(Verdict v);

struct CertifyConfig {
  spectral::ProfileOptions profile;
  std::vector<double> candidates{0.9, 0.75, 0.5, 0.25};
};

struct CertificateReport {
  std::string kernel;
  std::string triplet;
  kernels::IntegrabilityReport integrability;
  RhoBarChoice choice;
  TheoremIntegral theorem;
  SrdIntegral srd;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> reasons;
  bool s_independent = false;
  bool grid_approximate = false;
  spectral::ProfileOptions options;
};

/// Full pipeline. Throws Rejection when the kernel is not Λ-integrable or
/// the field is degenerate. The profile is returned through `profile_out`
/// when given.
CertificateReport certify(const kernels::Kernel& kernel, const levy::LevyTriplet& triplet,
                          const CertifyConfig& config,
                          std::optional<SpectralProfile>* profile_out = nullptr);

void write_report_text(std::ostream& os, const CertificateReport& report);
/// Two columns (quantity, value), one row per reported quantity.
void write_report_csv(std::ostream& os, const CertificateReport& report);

}  // namespace srd::certify
