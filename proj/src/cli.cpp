#include "srd/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "srd/csv.hpp"

namespace srd::cli {
namespace {

using config::Command;
using config::RunConfig;

struct Context {
  std::filesystem::path dir;
  std::ostream& out;
  std::ostream& err;
  bool verbose;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  }
  void note(const std::string& msg) const {
    if (verbose) err << msg << '\n';
  }
};

std::string lag_text(const std::vector<double>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += fmt::format("{}{}", i ? " " : "", t[i]);
  return s;
}

int run_certify(const RunConfig& rc, const Context& ctx) {
  std::optional<spectral::SpectralProfile> profile;
  ctx.note("building spectral profile");
  const auto rep = certify::certify(*rc.kernel, rc.triplet, rc.certify, &profile);
  {
    auto f = ctx.open("report.txt");
    certify::write_report_text(f, rep);
  }
  {
    auto f = ctx.open("certificate.csv");
    certify::write_report_csv(f, rep);
  }
  {
    auto f = ctx.open("sigma.csv");
    profile->write_sigma_csv(f);
  }
  {
    auto f = ctx.open("rho.csv");
    profile->write_rho_csv(f);
  }
  ctx.out << "verdict: " << certify::to_string(rep.verdict) << '\n';
  for (const auto& r : rep.reasons) ctx.out << "  " << r << '\n';
  return rep.verdict == certify::Verdict::CertifiedSrd ? kPass : kInconclusive;
}

int run_simulate(const RunConfig& rc, const Context& ctx) {
  if (!rc.simulation) throw config::ConfigError("simulate needs a [simulate] section");
  ctx.note("sampling field");
  const auto sample = simulate::sample_field(*rc.kernel, rc.triplet, *rc.simulation);
  {
    auto f = ctx.open("samples.csv");
    sample.write_csv(f);
  }
  const double band = 4.0 / std::sqrt(static_cast<double>(sample.rows));
  const std::vector<double> grid{0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
  bool ok = true;
  auto f = ctx.open("char.csv");
  csv::Writer w(f, {"s", "empirical_re", "empirical_im", "analytic_re", "analytic_im", "abs_diff",
                    "band", "within"});
  for (double s : grid) {
    const auto emp = simulate::empirical_char_X0(sample, s);
    const auto ana = spectral::char_X0(*rc.kernel, rc.triplet, s, rc.certify.profile.quad).value;
    const double diff = std::abs(emp - ana);
    ok = ok && diff <= band;
    w.row({csv::number(s), csv::number(emp.real()), csv::number(emp.imag()), csv::number(ana.real()),
           csv::number(ana.imag()), csv::number(diff), csv::number(band), diff <= band ? "true" : "false"});
  }
  ctx.out << fmt::format("simulated {} samples x {} columns; empirical char within 4/sqrt(N): {}\n",
                         sample.rows, sample.cols, ok ? "yes" : "no");
  return ok ? kPass : kRejected;
}

int run_validate(const RunConfig& rc, const Context& ctx) {
  auto f = ctx.open("validation.csv");
  csv::Writer w(f, {"check", "inputs", "lhs", "rhs", "margin", "passed"});
  bool ok = true;
  auto record = [&](const std::string& check, const std::string& inputs, double lhs, double rhs,
                    bool passed) {
    ok = ok && passed;
    w.row({check, inputs, csv::number(lhs), csv::number(rhs), csv::number(rhs - lhs),
           passed ? "true" : "false"});
    ctx.out << fmt::format("{:<8} {:<60} {}\n", check, inputs, passed ? "pass" : "FAIL");
  };

  ctx.note("negative definite inequalities");
  const auto nd = levy::check_negdef_inequalities(rc.triplet, rc.negdef_pairs, rc.seed);
  record("lemma0-2", fmt::format("pairs={} max_excess={:.3g}", nd.samples, nd.max_excess),
         static_cast<double>(nd.violations()), 0.0, nd.violations() == 0);

  ctx.note("lemma 3 sweep");
  const auto l3 = simulate::lemma3_sweep(*rc.kernel, rc.triplet, rc.lemma3_draws, rc.seed,
                                         rc.lemma3_t_max, rc.certify.profile.quad);
  record("lemma3", fmt::format("draws={} max_gap_over_bound={:.6g}", l3.draws, l3.max_ratio),
         static_cast<double>(l3.violations), 0.0, l3.violations == 0);

  if (rc.simulation && !rc.simulation->lags.empty()) {
    ctx.note("lemma 4: sampling field and building profile");
    const auto sample = simulate::sample_field(*rc.kernel, rc.triplet, *rc.simulation);
    const auto profile = spectral::SpectralProfile::build(*rc.kernel, rc.triplet, rc.certify.profile);
    for (std::size_t lag = 0; lag < rc.simulation->lags.size(); ++lag) {
      for (const auto& mu : rc.measures) {
        const auto r = simulate::lemma4_check(sample, lag, mu, profile, rc.sim_rho_bar);
        record("lemma4",
               fmt::format("t={} mu={} rho_bar={} se={:.3g}", lag_text(rc.simulation->lags[lag]),
                           mu.describe(), rc.sim_rho_bar, r.lhs_se),
               r.lhs, r.rhs, r.satisfied);
      }
    }
  }
  return ok ? kPass : kRejected;
}

int run_sweep(const config::RawConfig& raw, const RunConfig& base, const Context& ctx) {
  auto f = ctx.open("sweep.csv");
  csv::Writer w(f, {"key", "value", "verdict", "rho_bar", "theorem_integral", "theorem_error",
                    "srd_integral", "srd_tail", "reasons"});
  int worst = kPass;
  for (const auto& value : base.sweep_values) {
    config::RawConfig variant = raw;
    variant.set(base.sweep_key, value);
    try {
      const RunConfig rc = config::build(variant);
      const auto rep = certify::certify(*rc.kernel, rc.triplet, rc.certify);
      std::string reasons;
      for (const auto& r : rep.reasons) reasons += (reasons.empty() ? "" : "; ") + r;
      w.row({base.sweep_key, value, certify::to_string(rep.verdict), csv::number(rep.choice.rho_bar),
             csv::number(rep.theorem.value), csv::number(rep.theorem.error), csv::number(rep.srd.value),
             csv::number(rep.srd.tail), reasons});
      ctx.out << fmt::format("{} = {}: {}\n", base.sweep_key, value, certify::to_string(rep.verdict));
      if (rep.verdict != certify::Verdict::CertifiedSrd && worst == kPass) worst = kInconclusive;
    } catch (const Rejection& e) {
      const std::string nan = csv::number(std::nan(""));
      w.row({base.sweep_key, value, "rejected", nan, nan, nan, nan, nan, e.what()});
      ctx.out << fmt::format("{} = {}: rejected: {}\n", base.sweep_key, value, e.what());
      worst = kRejected;
    }
  }
  return worst;
}

}  // namespace

int run(const config::RawConfig& raw, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
  try {
    config::RawConfig effective = raw;
    if (options.seed) effective.set("seed", std::to_string(*options.seed));
    RunConfig rc = config::build(effective);
    if (options.seed && rc.simulation) rc.simulation->seed = *options.seed;

    std::filesystem::path dir = rc.output;
    if (const char* env = std::getenv(kOutputEnv); env && *env) dir = env;
    if (options.output) dir = *options.output;
    std::filesystem::create_directories(dir);
    const Context ctx{dir, out, err, options.verbose};
    ctx.note(fmt::format("command {} -> {}", config::to_string(rc.command), dir.string()));

    switch (rc.command) {
      case Command::Certify: return run_certify(rc, ctx);
      case Command::Simulate: return run_simulate(rc, ctx);
      case Command::Validate: return run_validate(rc, ctx);
      case Command::Sweep: return run_sweep(effective, rc, ctx);
    }
    return kInternal;
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kRejected;
  } catch (const Rejection& e) {
    err << "rejected: " << e.what() << '\n';
    return kRejected;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
}

int run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
  try {
    return run(config::read_file(config_path), options, out, err);
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kRejected;
  }
}

}  // namespace srd::cli
