#include "srd/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "srd/csv.hpp"

namespace srd::certify {
namespace {

constexpr double kTheoremRelTol = 1e-3;
constexpr double kTailShareCap = 0.05;
constexpr double kSqrtPi = 1.772453850905516027298167483341145;

struct PowerFit {
  double exponent;  // p in σ² ≈ A s^p
  double log_amp;   // log A
};

PowerFit fit_two(double s0, double v0, double s1, double v1) {
  const double p = std::log(v1 / v0) / std::log(s1 / s0);
  return {p, std::log(v0) - p * std::log(s0)};
}

// \int_0^{s0} sqrt(σ²)/s exp(-c σ²) ds for σ² = A s^p: sqrt(pi) erf(sqrt(U)) / (p sqrt(c)).
double endpoint_piece(const PowerFit& f, double s0, double c) {
  const double u = c * std::exp(f.log_amp + f.exponent * std::log(s0));
  return kSqrtPi * std::erf(std::sqrt(u)) / (f.exponent * std::sqrt(c));
}

// \int_{sN}^inf for σ² = A s^p: sqrt(pi) erfc(sqrt(U)) / (p sqrt(c)).
double tail_piece(const PowerFit& f, double sn, double c) {
  const double u = c * std::exp(f.log_amp + f.exponent * std::log(sn));
  return kSqrtPi * std::erfc(std::sqrt(u)) / (f.exponent * std::sqrt(c));
}

// Least-squares fit of log y = a + q log r.
std::pair<double, double> loglog_fit(const std::vector<double>& r, const std::vector<double>& y) {
  const std::size_t n = r.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(r[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - q * sx) / n, q};
}

}  // namespace

std::string to_string(Verdict v) {
  return v == Verdict::CertifiedSrd ? "certified-SRD" : "inconclusive";
}

RhoBarChoice choose_rho_bar(const SpectralProfile& profile, std::span<const double> candidates) {
  std::vector<double> sorted(candidates.begin(), candidates.end());
  for (double c : sorted) {
    if (!(c > 0.0 && c < 1.0)) throw Rejection("rho_bar candidates must lie in (0, 1)");
  }
  std::sort(sorted.begin(), sorted.end());

  const auto rho = profile.rho_tilde();
  const int outer = profile.half_count();
  double outer_max = 0.0;
  double inner_max = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (profile.shell(i) == outer) outer_max = std::max(outer_max, rho[i]);
    if (profile.shell(i) == outer - 1) inner_max = std::max(inner_max, rho[i]);
  }
  RhoBarChoice choice;
  const bool decreasing = outer > 0 && outer_max <= inner_max + 1e-12;
  if (!decreasing) return choice;

  for (double c : sorted) {
    std::size_t count = 0;
    bool touches = false;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] > c) {
        ++count;
        touches = touches || profile.shell(i) == outer;
      }
    }
    if (touches) continue;
    choice.feasible.push_back(c);
    if (!choice.found) {
      choice.found = true;
      choice.rho_bar = c;
      choice.exceedance_count = count;
      choice.ac_measure = static_cast<double>(count) * profile.cell_volume();
    }
  }
  return choice;
}

TheoremIntegral theorem_integral(const SpectralProfile& profile, double rho_bar) {
  if (!(rho_bar > 0.0 && rho_bar < 1.0)) throw Rejection("rho_bar must lie in (0, 1)");
  const double c = 1.0 - rho_bar;
  const auto s = profile.s_grid();
  const auto sig = profile.sigma_sq();
  const std::size_t n = s.size();
  TheoremIntegral out;

  // Near 0: σ_f(s)/s ~ s^{p/2 - 1}, integrable iff p > 0.
  const PowerFit low = fit_two(s[0], sig[0], s[1], sig[1]);
  const PowerFit low_alt = fit_two(s[1], sig[1], s[2], sig[2]);
  out.low_exponent = low.exponent;
  if (!(low.exponent > 1e-9)) {
    out.divergent = true;
    out.divergence = fmt::format(
        "sigma_f(s)/s has local exponent {:.6g} <= -1 at s -> 0", 0.5 * low.exponent - 1.0);
  } else {
    out.endpoint_part = endpoint_piece(low, s[0], c);
    if (low_alt.exponent > 1e-9) {
      out.error += std::abs(out.endpoint_part - endpoint_piece(low_alt, s[0], c));
    }
  }

  // Large s: the exponential factor controls the tail as long as σ_f² keeps growing.
  const PowerFit high = fit_two(s[n - 2], sig[n - 2], s[n - 1], sig[n - 1]);
  const PowerFit high_alt = fit_two(s[n - 3], sig[n - 3], s[n - 2], sig[n - 2]);
  out.high_exponent = high.exponent;
  bool growing = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (s[i] >= s[n - 1] / 10.0 && sig[i] < sig[i - 1] * (1.0 - 1e-12)) growing = false;
  }
  const double top = c * sig[n - 1];
  if (top >= 700.0) {
    out.tail_part = 0.0;
  } else if (!growing || !(high.exponent > 1e-2)) {
    out.divergent = true;
    if (!out.divergence.empty()) out.divergence += "; ";
    out.divergence += fmt::format(
        "sigma_f^2 stops growing at large s (fitted exponent {:.6g}), so sigma_f(s)/s is not "
        "integrable at infinity",
        high.exponent);
  } else {
    out.tail_part = tail_piece(high, s[n - 1], c);
    if (high_alt.exponent > 1e-2) {
      out.error += std::abs(out.tail_part - tail_piece(high_alt, s[n - 1], c));
    }
  }

  quad::Options opt = profile.options().quad;
  opt.rel_tol = std::max(opt.rel_tol, 1e-10);
  auto g = [&](double v) {
    const double sq = profile.sigma_sq_at(std::exp(v)).value;
    return std::sqrt(sq) * std::exp(-c * sq);
  };
  const double a = std::log(s[0]);
  const double b = std::log(s[n - 1]);
  std::vector<double> cuts{a};
  if (a < 0.0 && 0.0 < b) cuts.push_back(0.0);
  cuts.push_back(b);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto r = quad::integrate<double>(g, cuts[i], cuts[i + 1], opt);
    out.middle_part += r.value;
    out.error += r.error;
    if (!r.converged) out.error = std::max(out.error, std::abs(r.value));
  }

  if (out.divergent) {
    out.value = std::numeric_limits<double>::infinity();
    out.error = std::numeric_limits<double>::infinity();
  } else {
    out.value = out.endpoint_part + out.middle_part + out.tail_part;
  }
  return out;
}

SrdIntegral srd_integral(const SpectralProfile& profile) {
  SrdIntegral out;
  const auto rho = profile.rho_tilde();
  const auto err = profile.rho_tilde_error();
  const int d = profile.dim();
  const int m = profile.half_count();
  const double vol = profile.cell_volume();

  double coarse = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    out.lattice_sum += rho[i] * vol;
    out.error += err[i] * vol;
    bool even = true;
    for (double v : profile.t_point(i)) {
      even = even && (std::lround(v / profile.t_step()) % 2 == 0);
    }
    if (even) coarse += rho[i] * vol * std::pow(2.0, d);
  }
  // Richardson-style estimate of the lattice discretization error.
  if (m >= 2) out.error += std::abs(out.lattice_sum - coarse) / 3.0;

  const auto& kernel = profile.kernel();
  if (kernel.bounded() && m * profile.t_step() >= kernel.support_diameter()) {
    // f(t - .) f(-.) vanishes once |t_k| exceeds the support extent.
    out.tail = 0.0;
    out.tail_method = "zero beyond support";
  } else {
    std::vector<double> shell_sum(m + 1, 0.0);
    std::vector<double> shell_count(m + 1, 0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      shell_sum[profile.shell(i)] += rho[i];
      shell_count[profile.shell(i)] += 1.0;
    }
    const int first = std::max(1, static_cast<int>(std::ceil(0.75 * m)));
    std::vector<double> radii;
    std::vector<double> means;
    for (int k = first; k <= m; ++k) {
      const double mean = shell_sum[k] / shell_count[k];
      if (mean > 0.0) {
        radii.push_back(k * profile.t_step());
        means.push_back(mean);
      }
    }
    if (shell_sum[m] == 0.0 || radii.size() < 2) {
      out.tail = 0.0;
      out.tail_method = "vanishing outer shells";
    } else {
      out.tail_method = "power-law fit over outer 25% of shells";
      const auto [a, q] = loglog_fit(radii, means);
      out.tail_exponent = q;
      const double r = (m + 0.5) * profile.t_step();
      auto tail_of = [&](double la, double qq) {
        return std::exp(la) * d * std::pow(2.0, d) * std::pow(r, qq + d) / (-(qq + d));
      };
      if (q >= -d) {
        out.divergent = true;
        out.tail = std::numeric_limits<double>::infinity();
      } else {
        out.tail = tail_of(a, q);
        // Spread between fits over the outer and inner halves of the fit range.
        if (radii.size() >= 4) {
          const std::size_t h = radii.size() / 2;
          const auto [a1, q1] = loglog_fit({radii.begin(), radii.begin() + h},
                                           {means.begin(), means.begin() + h});
          const auto [a2, q2] = loglog_fit({radii.begin() + h, radii.end()},
                                           {means.begin() + h, means.end()});
          double spread = 0.0;
          if (q1 < -d) spread = std::max(spread, std::abs(tail_of(a1, q1) - out.tail));
          if (q2 < -d) spread = std::max(spread, std::abs(tail_of(a2, q2) - out.tail));
          out.error += spread;
        }
      }
    }
  }
  out.value = out.lattice_sum + out.tail;

  if (const auto p = levy::homogeneity_exponent(profile.triplet())) {
    const auto* env = std::get_if<kernels::PowerDecay>(&kernel.support());
    if (env && 0.5 * (*p) * env->exponent <= d) {
      out.fubini_value = std::numeric_limits<double>::infinity();
    } else {
      const double half = kernels::power_integral(kernel, 0.5 * (*p), profile.options().quad).value;
      const double full = kernels::power_integral(kernel, *p, profile.options().quad).value;
      out.fubini_value = half * half / full;
    }
  }
  return out;
}

CertificateReport certify(const kernels::Kernel& kernel, const levy::LevyTriplet& triplet,
                          const CertifyConfig& config,
                          std::optional<SpectralProfile>* profile_out) {
  if (config.candidates.empty()) throw Rejection("no rho_bar candidates given");
  CertificateReport rep;
  rep.kernel = kernel.name();
  rep.triplet = triplet.describe();
  rep.options = config.profile;

  rep.integrability = kernels::check_lambda_integrable(kernel, triplet, config.profile.quad);
  {
    const auto& ir = rep.integrability;
    for (const auto* c : {&ir.drift, &ir.gaussian, &ir.jumps}) {
      if (!c->finite && !c->inconclusive) {
        throw Rejection("kernel is not Lambda-integrable: " + ir.failing() + " is infinite");
      }
    }
    if (ir.inconclusive()) {
      rep.reasons.push_back("Lambda-integrability inconclusive: " + ir.failing());
    }
  }

  const SpectralProfile profile = SpectralProfile::build(kernel, triplet, config.profile);
  rep.s_independent = profile.s_independent();
  rep.grid_approximate = profile.grid_approximate();

  rep.choice = choose_rho_bar(profile, config.candidates);
  const double rho_bar = rep.choice.found
                             ? rep.choice.rho_bar
                             : *std::max_element(config.candidates.begin(), config.candidates.end());
  rep.theorem = theorem_integral(profile, rho_bar);
  rep.srd = srd_integral(profile);

  if (!rep.choice.found) {
    rep.reasons.push_back(
        "no candidate rho_bar keeps {t : rho_tilde_t > rho_bar} strictly inside the window");
  }
  if (rep.theorem.divergent) {
    rep.reasons.push_back("theorem integral diverges: " + rep.theorem.divergence);
  } else if (!(rep.theorem.relative_error() < kTheoremRelTol)) {
    rep.reasons.push_back(fmt::format("theorem integral relative error {:.3g} >= {:.0e}",
                                      rep.theorem.relative_error(), kTheoremRelTol));
  }
  if (rep.srd.divergent) {
    rep.reasons.push_back(fmt::format(
        "srd integral diverges: fitted tail exponent {:.6g} >= -d = {}",
        rep.srd.tail_exponent.value_or(0.0), -kernel.dim()));
  } else if (!(rep.srd.tail_share() < kTailShareCap)) {
    rep.reasons.push_back(fmt::format("srd integral tail term is {:.3g}% of the total (cap 5%)",
                                      100.0 * rep.srd.tail_share()));
  }
  rep.verdict = rep.reasons.empty() ? Verdict::CertifiedSrd : Verdict::Inconclusive;
  if (profile_out) profile_out->emplace(profile);
  return rep;
}

void write_report_text(std::ostream& os, const CertificateReport& r) {
  const auto& o = r.options;
  os << "verdict: " << to_string(r.verdict) << '\n';
  for (const auto& reason : r.reasons) os << "  reason: " << reason << '\n';
  os << "kernel: " << r.kernel << '\n';
  os << "triplet: " << r.triplet << '\n';
  os << "\nLambda-integrability\n";
  auto cond = [&](const char* name, const kernels::IntegrabilityCondition& c) {
    os << fmt::format("  {:<10} finite={} inconclusive={} value={:.17g} err={:.3g}\n", name,
                      c.finite, c.inconclusive, c.value, c.error);
  };
  cond("drift", r.integrability.drift);
  cond("gaussian", r.integrability.gaussian);
  cond("jumps", r.integrability.jumps);

  os << "\nrho_tilde_t\n";
  os << fmt::format("  lattice: step {:.17g}, half-width {:.17g}\n", o.t_step, o.window);
  if (r.s_independent) {
    os << "  rho_t(s1, s2) is s-independent; rho_tilde_t evaluated exactly at (1, 1)\n";
  } else {
    os << fmt::format(
        "  grid-approximate: sup over |s1|,|s2| in [{:.3g}, {:.3g}] ({} points, {} refinement "
        "rounds); values are lower bounds of the true supremum\n",
        o.search.s_min, o.search.s_max, o.search.points, o.search.refine_rounds);
  }

  os << "\nthreshold\n";
  if (r.choice.found) {
    os << fmt::format("  rho_bar = {:.17g}, |A^c| ~ {:.17g} ({}, {} lattice points)\n",
                      r.choice.rho_bar, r.choice.ac_measure, r.choice.method,
                      r.choice.exceedance_count);
  } else {
    os << "  no feasible rho_bar\n";
  }
  os << "  feasible candidates:";
  for (double c : r.choice.feasible) os << ' ' << c;
  os << '\n';

  os << "\ntheorem integral  int_0^inf sigma_f(s)/s exp(-(1-rho_bar) sigma_f^2(s)) ds\n";
  os << fmt::format("  value {:.17g} +- {:.3g} (endpoint {:.6g}, middle {:.6g}, tail {:.6g})\n",
                    r.theorem.value, r.theorem.error, r.theorem.endpoint_part,
                    r.theorem.middle_part, r.theorem.tail_part);
  os << fmt::format("  sigma_f^2 exponents: {:.6g} near 0, {:.6g} near s_max\n",
                    r.theorem.low_exponent, r.theorem.high_exponent);
  if (r.theorem.divergent) os << "  DIVERGENT: " << r.theorem.divergence << '\n';

  os << "\nsrd integral  int rho_tilde_t dt\n";
  os << fmt::format("  value {:.17g} = lattice {:.17g} + tail {:.17g} ({}), err {:.3g}\n",
                    r.srd.value, r.srd.lattice_sum, r.srd.tail, r.srd.tail_method, r.srd.error);
  if (r.srd.tail_exponent) os << fmt::format("  fitted tail exponent {:.6g}\n", *r.srd.tail_exponent);
  if (r.srd.fubini_value) {
    os << fmt::format("  direct value ||f||_(p/2)^p / ||f||_p^p = {:.17g}\n", *r.srd.fubini_value);
  }
  if (r.srd.divergent) os << "  DIVERGENT\n";
}

void write_report_csv(std::ostream& os, const CertificateReport& r) {
  csv::Writer w(os, {"quantity", "value"});
  auto num = [&](const char* k, double v) { w.row({k, csv::number(v)}); };
  auto txt = [&](const char* k, const std::string& v) { w.row({k, v}); };
  auto flag = [&](const char* k, bool v) { w.row({k, v ? "true" : "false"}); };
  txt("verdict", to_string(r.verdict));
  txt("kernel", r.kernel);
  txt("triplet", r.triplet);
  flag("integrability_drift_finite", r.integrability.drift.finite);
  num("integrability_drift_value", r.integrability.drift.value);
  flag("integrability_gaussian_finite", r.integrability.gaussian.finite);
  num("integrability_gaussian_value", r.integrability.gaussian.value);
  flag("integrability_jumps_finite", r.integrability.jumps.finite);
  num("integrability_jumps_value", r.integrability.jumps.value);
  flag("rho_bar_found", r.choice.found);
  num("rho_bar", r.choice.rho_bar);
  num("ac_measure", r.choice.ac_measure);
  txt("ac_method", r.choice.method);
  flag("theorem_divergent", r.theorem.divergent);
  num("theorem_integral", r.theorem.value);
  num("theorem_error", r.theorem.error);
  flag("srd_divergent", r.srd.divergent);
  num("srd_integral", r.srd.value);
  num("srd_lattice_sum", r.srd.lattice_sum);
  num("srd_tail", r.srd.tail);
  num("srd_error", r.srd.error);
  txt("srd_tail_method", r.srd.tail_method);
  num("srd_tail_exponent", r.srd.tail_exponent.value_or(std::numeric_limits<double>::quiet_NaN()));
  num("srd_direct_value", r.srd.fubini_value.value_or(std::numeric_limits<double>::quiet_NaN()));
  flag("s_independent", r.s_independent);
  flag("grid_approximate", r.grid_approximate);
  num("search_s_min", r.options.search.s_min);
  num("search_s_max", r.options.search.s_max);
  num("window", r.options.window);
  num("t_step", r.options.t_step);
}

}  // namespace srd::certify
