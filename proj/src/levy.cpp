#include "srd/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "srd/errors.hpp"
#include "srd/rng.hpp"

namespace srd::levy {
namespace {

constexpr double kPi = std::numbers::pi;

// 1 - cos(x) without cancellation.
double one_minus_cos(double x) {
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h;
}

// Density on [a, b]: either d0 * (y/a)^q or d0 + slope * (y - a).
struct Piece {
  double a;
  double b;
  double d0;
  bool power;
  double q;
  double slope;

  double density(double y) const {
    return power ? d0 * std::pow(y / a, q) : d0 + slope * (y - a);
  }

  // \int_lo^hi y^k density(y) dy for [lo, hi] inside [a, b].
  double moment(int k, double lo, double hi) const {
    lo = std::max(lo, a);
    hi = std::min(hi, b);
    if (hi <= lo) return 0.0;
    if (power) {
      const double m = k + q + 1.0;
      const double pref = d0 * std::pow(a, -q);
      if (std::abs(m) < 1e-12) return pref * std::log(hi / lo);
      return pref * (std::pow(hi, m) - std::pow(lo, m)) / m;
    }
    const double c0 = d0 - slope * a;
    return c0 * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1) +
           slope * (std::pow(hi, k + 2) - std::pow(lo, k + 2)) / (k + 2);
  }
};

Piece make_piece(double a, double b, double da, double db) {
  Piece p{a, b, da, false, 0.0, 0.0};
  if (da > 0.0 && db > 0.0) {
    p.power = true;
    p.q = std::log(db / da) / std::log(b / a);
  } else {
    p.slope = (db - da) / (b - a);
  }
  return p;
}

// Pieces of one side of a tabulated density, innermost (extrapolated) first.
std::vector<Piece> side_pieces(const Tabulated& t, const std::vector<double>& dens) {
  std::vector<Piece> out;
  const auto& r = t.radii;
  Piece inner = make_piece(r[0], r[1], dens[0], dens[1]);
  // Extend the first interval's law inward to the cutoff.
  if (inner.power) {
    inner.d0 = dens[0] * std::pow(Tabulated::kInnerCutoff / r[0], inner.q);
  } else {
    inner.slope = 0.0;
  }
  inner.a = Tabulated::kInnerCutoff;
  inner.b = r[0];
  out.push_back(inner);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    out.push_back(make_piece(r[i], r[i + 1], dens[i], dens[i + 1]));
  }
  return out;
}

double side_moment(const Tabulated& t, const std::vector<double>& dens, int k, double lo,
                   double hi) {
  double acc = 0.0;
  for (const auto& p : side_pieces(t, dens)) acc += p.moment(k, lo, hi);
  return acc;
}

std::complex<double> tabulated_exponent(const Tabulated& t, double s, const quad::Options& opt) {
  const auto pos = side_pieces(t, t.positive);
  const auto neg = side_pieces(t, t.negative);
  std::complex<double> levy_integral{0.0, 0.0};  // \int (e^{isy} - 1 - isy 1) nu(dy)
  double residual = 0.0;
  bool ok = true;

  for (std::size_t i = 0; i < pos.size(); ++i) {
    const Piece& p = pos[i];
    const Piece& n = neg[i];
    const bool smallest = (i == 0);
    if (smallest && std::abs(s) * p.b <= 1e-3 && p.b <= 1.0) {
      // Small-jump region: cos(sy) - 1 ~ -(sy)^2/2 + (sy)^4/24, sin(sy) - sy ~ -(sy)^3/6.
      const double m2 = p.moment(2, p.a, p.b) + n.moment(2, n.a, n.b);
      const double m4 = p.moment(4, p.a, p.b) + n.moment(4, n.a, n.b);
      const double m3 = p.moment(3, p.a, p.b) - n.moment(3, n.a, n.b);
      const double s2 = s * s;
      levy_integral += std::complex<double>(-0.5 * s2 * m2 + s2 * s2 * m4 / 24.0, -s2 * s * m3 / 6.0);
      continue;
    }
    if (!smallest && p.a >= 1.0 && std::abs(s) * (p.b - p.a) > 200.0 * std::numbers::pi) {
      // Many oscillations: cos(sy) and sin(sy) average out against the
      // monotone density, up to 2 (g(a) + g(b)) / |s| each.
      const double m0 = p.moment(0, p.a, p.b) + n.moment(0, n.a, n.b);
      levy_integral += std::complex<double>(-m0, 0.0);
      const double ends = p.density(p.a) + p.density(p.b) + n.density(n.a) + n.density(n.b);
      residual += 4.0 * ends / std::abs(s);
      continue;
    }
    auto integrand = [&](double y) {
      const double dp = p.density(y);
      const double dn = n.density(y);
      const double comp = (y <= 1.0) ? s * y : 0.0;
      return std::complex<double>(-one_minus_cos(s * y) * (dp + dn),
                                  (std::sin(s * y) - comp) * (dp - dn));
    };
    std::vector<double> cuts{p.a};
    if (p.a < 1.0 && 1.0 < p.b) cuts.push_back(1.0);
    cuts.push_back(p.b);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      quad::Result<std::complex<double>> r;
      if (smallest) {
        // Integrate the extrapolated inner region in log y.
        auto logged = [&](double w) {
          const double y = std::exp(w);
          return y * integrand(y);
        };
        r = quad::integrate<std::complex<double>>(logged, std::log(cuts[c]), std::log(cuts[c + 1]),
                                                  opt);
      } else {
        r = quad::integrate<std::complex<double>>(integrand, cuts[c], cuts[c + 1], opt);
      }
      levy_integral += r.value;
      residual += r.error;
      ok = ok && r.converged;
    }
  }
  if (!ok && residual > std::max(opt.abs_tol, opt.rel_tol * std::abs(levy_integral))) {
    throw QuadratureError(fmt::format("tabulated Levy integral at s={} did not converge", s),
                          -levy_integral.real(), residual);
  }
  return -levy_integral;
}

void validate(const SymmetricStable& m) {
  if (!(m.alpha > 0.0 && m.alpha < 2.0)) throw Rejection("stable index alpha must lie in (0, 2)");
  if (!(m.scale > 0.0) || !std::isfinite(m.scale)) throw Rejection("stable scale must be positive");
}

void validate(const CompoundPoisson& m) {
  if (!(m.rate > 0.0) || !std::isfinite(m.rate)) throw Rejection("compound Poisson rate must be positive");
  if (m.atoms.empty() || m.atoms.size() != m.weights.size()) {
    throw Rejection("compound Poisson jump law needs matching, non-empty atoms and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    if (!std::isfinite(m.atoms[i])) throw Rejection("compound Poisson atoms must be finite");
    if (!(m.weights[i] > 0.0)) throw Rejection("compound Poisson weights must be positive");
    total += m.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Rejection(fmt::format("compound Poisson weights sum to {:.17g}, not 1", total));
  }
}

void validate(const Tabulated& t) {
  const auto n = t.radii.size();
  if (n < 2 || t.positive.size() != n || t.negative.size() != n) {
    throw Rejection("tabulated Levy measure needs at least two nodes per side");
  }
  if (!(t.radii[0] > Tabulated::kInnerCutoff)) {
    throw Rejection("tabulated Levy grid must stay away from 0 (|y| > 1e-8)");
  }
  const double ratio = t.radii[1] / t.radii[0];
  if (!(ratio > 1.0)) throw Rejection("tabulated Levy grid must be strictly increasing in |y|");
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && std::abs(t.radii[i + 1] / t.radii[i] - ratio) > 1e-6 * ratio) {
      throw Rejection("tabulated Levy grid must be log-spaced");
    }
    if (!(t.positive[i] >= 0.0) || !(t.negative[i] >= 0.0) || !std::isfinite(t.positive[i]) ||
        !std::isfinite(t.negative[i])) {
      throw Rejection("tabulated Levy density must be finite and nonnegative");
    }
  }
}

void validate(const NoJumps&) {}

}  // namespace

LevyMeasure::LevyMeasure(Variant v) : v_(std::move(v)) {
  std::visit([](const auto& m) { validate(m); }, v_);
  const double mass = small_big(1.0);
  if (!std::isfinite(mass)) throw Rejection("Levy measure violates \\int min(1, y^2) nu(dy) < inf");
}

LevyMeasure LevyMeasure::tabulated(std::vector<std::pair<double, double>> rows) {
  std::sort(rows.begin(), rows.end());
  Tabulated t;
  std::vector<std::pair<double, double>> neg;
  for (const auto& [y, d] : rows) {
    if (y == 0.0) throw Rejection("tabulated Levy grid must exclude 0");
    if (y > 0.0) {
      t.radii.push_back(y);
      t.positive.push_back(d);
    } else {
      neg.emplace_back(-y, d);
    }
  }
  std::sort(neg.begin(), neg.end());
  if (neg.size() != t.radii.size()) throw Rejection("tabulated Levy grid must be symmetric about 0");
  for (std::size_t i = 0; i < neg.size(); ++i) {
    if (std::abs(neg[i].first - t.radii[i]) > 1e-9 * t.radii[i]) {
      throw Rejection("tabulated Levy grid must be symmetric about 0");
    }
    t.negative.push_back(neg[i].second);
  }
  return LevyMeasure(std::move(t));
}

std::string LevyMeasure::describe() const {
  struct {
    std::string operator()(const NoJumps&) const { return "none"; }
    std::string operator()(const SymmetricStable& m) const {
      return fmt::format("symmetric-stable(alpha={:.17g}, scale={:.17g})", m.alpha, m.scale);
    }
    std::string operator()(const CompoundPoisson& m) const {
      return fmt::format("compound-poisson(rate={:.17g}, atoms={})", m.rate, m.atoms.size());
    }
    std::string operator()(const Tabulated& m) const {
      return fmt::format("tabulated({} nodes per side)", m.radii.size());
    }
  } visitor;
  return std::visit(visitor, v_);
}

std::complex<double> LevyMeasure::jump_exponent(double s, const quad::Options& opt) const {
  if (s == 0.0) return {0.0, 0.0};
  struct {
    double s;
    const quad::Options& opt;
    std::complex<double> operator()(const NoJumps&) const { return {0.0, 0.0}; }
    std::complex<double> operator()(const SymmetricStable& m) const {
      return {m.scale * stable_constant(m.alpha) * std::pow(std::abs(s), m.alpha), 0.0};
    }
    std::complex<double> operator()(const CompoundPoisson& m) const {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        const double y = m.atoms[k];
        const double comp = (std::abs(y) <= 1.0) ? s * y : 0.0;
        re += m.weights[k] * one_minus_cos(s * y);
        im -= m.weights[k] * (std::sin(s * y) - comp);
      }
      return {m.rate * re, m.rate * im};
    }
    std::complex<double> operator()(const Tabulated& m) const {
      return tabulated_exponent(m, s, opt);
    }
  } visitor{s, opt};
  return std::visit(visitor, v_);
}

double LevyMeasure::small_big(double u) const {
  const double au = std::abs(u);
  struct {
    double au;
    double operator()(const NoJumps&) const { return 0.0; }
    double operator()(const SymmetricStable& m) const {
      if (au == 0.0) return 0.0;
      return 2.0 * m.scale * std::pow(au, m.alpha) * (1.0 / (2.0 - m.alpha) + 1.0 / m.alpha);
    }
    double operator()(const CompoundPoisson& m) const {
      double acc = 0.0;
      for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        acc += m.weights[k] * std::min(1.0, m.atoms[k] * m.atoms[k] * au * au);
      }
      return m.rate * acc;
    }
    double operator()(const Tabulated& t) const {
      if (au == 0.0) return 0.0;
      const double split = 1.0 / au;
      double acc = 0.0;
      for (const auto* dens : {&t.positive, &t.negative}) {
        acc += au * au * side_moment(t, *dens, 2, 0.0, split);
        acc += side_moment(t, *dens, 0, split, std::numeric_limits<double>::infinity());
      }
      return acc;
    }
  } visitor{au};
  return std::visit(visitor, v_);
}

double LevyMeasure::compensation(double u) const {
  const double au = std::abs(u);
  struct {
    double au;
    double operator()(const NoJumps&) const { return 0.0; }
    double operator()(const SymmetricStable&) const { return 0.0; }  // odd integrand
    double operator()(const CompoundPoisson& m) const {
      double acc = 0.0;
      for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        const double y = m.atoms[k];
        const double in_scaled = (std::abs(y) * au <= 1.0) ? 1.0 : 0.0;
        const double in_unit = (std::abs(y) <= 1.0) ? 1.0 : 0.0;
        acc += m.weights[k] * (in_scaled - in_unit) * y;
      }
      return m.rate * acc;
    }
    double operator()(const Tabulated& t) const {
      const double inf = std::numeric_limits<double>::infinity();
      const double edge = (au == 0.0) ? inf : 1.0 / au;
      auto odd = [&](double lo, double hi) {
        return side_moment(t, t.positive, 1, lo, hi) - side_moment(t, t.negative, 1, lo, hi);
      };
      if (edge >= 1.0) return odd(1.0, edge);
      return -odd(edge, 1.0);
    }
  } visitor{au};
  return std::visit(visitor, v_);
}

double LevyMeasure::tail_compensation() const { return compensation(0.0); }

bool LevyMeasure::bounded_jumps() const noexcept {
  return !std::holds_alternative<SymmetricStable>(v_);
}

LevyTriplet::LevyTriplet(double a0, double b0, LevyMeasure nu)
    : drift(a0), gaussian(b0), measure(std::move(nu)) {
  if (!std::isfinite(a0) || !std::isfinite(b0)) throw Rejection("triplet entries must be finite");
  if (b0 < 0.0) throw Rejection("Gaussian coefficient b0 must be nonnegative");
  if (b0 == 0.0 && a0 == 0.0 && measure.is_none()) {
    throw Rejection("degenerate integrator: a0 = 0, b0 = 0 and no Levy measure");
  }
}

std::string LevyTriplet::describe() const {
  return fmt::format("a0={:.17g} b0={:.17g} nu0={}", drift, gaussian, measure.describe());
}

double stable_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw Rejection("stable index alpha must lie in (0, 2)");
  if (std::abs(alpha - 1.0) < 1e-12) return kPi;
  return 2.0 * std::tgamma(1.0 - alpha) * std::cos(0.5 * kPi * alpha) / alpha;
}

SymmetricStable calibrated_stable(double alpha) { return {alpha, 1.0 / stable_constant(alpha)}; }

CumulantValue eval_K(const LevyTriplet& triplet, double s, const quad::Options& opt) {
  if (s == 0.0) return {};
  const std::complex<double> jumps = triplet.measure.jump_exponent(s, opt);
  CumulantValue k;
  k.re = 0.5 * s * s * triplet.gaussian + jumps.real();
  k.im = -s * triplet.drift + jumps.imag();
  return k;
}

double eval_ReK(const LevyTriplet& triplet, double s, const quad::Options& opt) {
  const double a = std::abs(s);
  if (a == 0.0) return 0.0;
  return 0.5 * a * a * triplet.gaussian + triplet.measure.jump_exponent(a, opt).real();
}

std::optional<double> homogeneity_exponent(const LevyTriplet& triplet) {
  const auto& v = triplet.measure.variant();
  if (std::holds_alternative<NoJumps>(v) && triplet.gaussian > 0.0) return 2.0;
  if (const auto* st = std::get_if<SymmetricStable>(&v); st && triplet.gaussian == 0.0) {
    return st->alpha;
  }
  return std::nullopt;
}

NegdefReport check_negdef_inequalities(const LevyTriplet& triplet, std::size_t n_samples,
                                       std::uint64_t seed) {
  NegdefReport rep;
  rep.samples = n_samples;
  CounterRng rng(seed, 0);
  auto heavy = [&] {
    const double scale = std::pow(10.0, -2.0 + 4.0 * rng.uniform_open());
    return scale * std::tan(kPi * (rng.uniform_open() - 0.5));
  };
  auto psi = [&](double s) { return eval_K(triplet, s).complex(); };
  auto note = [&](std::size_t& counter, double excess, double tol) {
    if (excess > tol) ++counter;
    rep.max_excess = std::max(rep.max_excess, excess / tol);
  };

  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = heavy();
    const double y = heavy();
    const auto px = psi(x);
    const auto py = psi(y);
    const auto pmy = psi(-y);
    const auto pmx = psi(-x);
    const auto psum = psi(x + y);
    const auto pdiff = psi(x - y);
    const double tol =
        1e-9 * (1.0 + std::abs(px) + std::abs(py) + std::abs(psum) + std::abs(pdiff));

    for (double re : {px.real(), py.real(), psum.real(), pdiff.real()}) note(rep.nonnegative, -re, tol);
    note(rep.hermitian, std::abs(px - std::conj(pmx)), tol);

    const double rx = std::max(px.real(), 0.0);
    const double ry = std::max(py.real(), 0.0);
    const double cross = 2.0 * std::sqrt(rx) * std::sqrt(ry);
    // The minus case is the plus case applied to (x, -y).
    note(rep.complex_bound, std::abs(px + py - psum) - cross, tol);
    note(rep.complex_bound, std::abs(px + pmy - pdiff) - cross, tol);
    note(rep.real_bound, std::abs(px.real() + py.real() - psum.real()) - cross, tol);
    note(rep.real_bound, std::abs(px.real() + py.real() - pdiff.real()) - cross, tol);

    const double gap = std::sqrt(rx) - std::sqrt(ry);
    const double lhs = std::min(psum.real(), px.real() + py.real());
    note(rep.lower_bound, gap * gap - lhs, tol);
  }
  return rep;
}

}  // namespace srd::levy
