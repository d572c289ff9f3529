#include "srd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace srd::kernels {
namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: throw Rejection("kernel dimension must be 1, 2 or 3");
  }
}

void check_dim(int d) {
  if (d < 1 || d > 3) throw Rejection("kernel dimension must be 1, 2 or 3");
}

double euclidean(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

Kernel::Kernel(std::string name, int dim, Evaluator f, Support support,
               std::vector<std::vector<double>> breaks, PowerIntegral closed_form, bool continuous)
    : name_(std::move(name)),
      dim_(dim),
      f_(std::move(f)),
      support_(std::move(support)),
      breaks_(std::move(breaks)),
      closed_form_(std::move(closed_form)),
      continuous_(continuous) {
  check_dim(dim_);
  if (static_cast<int>(breaks_.size()) != dim_) {
    throw Rejection("kernel needs one break-point list per axis");
  }
  for (auto& b : breaks_) b = sorted_unique(std::move(b));
  if (const auto* box = std::get_if<BoundedBox>(&support_)) {
    if (static_cast<int>(box->lo.size()) != dim_ || static_cast<int>(box->hi.size()) != dim_) {
      throw Rejection("bounded-box support must have one (lo, hi) pair per axis");
    }
    for (int k = 0; k < dim_; ++k) {
      if (!(box->lo[k] < box->hi[k])) throw Rejection("bounded-box support needs lo < hi");
      auto& b = breaks_[k];
      b.push_back(box->lo[k]);
      b.push_back(box->hi[k]);
      b = sorted_unique(std::move(b));
      std::erase_if(b, [&](double v) { return v < box->lo[k] || v > box->hi[k]; });
    }
  } else if (breaks_.front().empty()) {
    for (auto& b : breaks_) b = {0.0};
  }
}

double Kernel::operator()(std::span<const double> x) const {
  if (const auto* box = std::get_if<BoundedBox>(&support_)) {
    for (int k = 0; k < dim_; ++k) {
      if (x[k] < box->lo[k] || x[k] > box->hi[k]) return 0.0;
    }
  }
  return f_(x);
}

std::optional<double> Kernel::closed_form_power_integral(double p) const {
  if (!closed_form_) return std::nullopt;
  return closed_form_(p);
}

double Kernel::support_diameter() const {
  const auto* box = std::get_if<BoundedBox>(&support_);
  if (!box) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (int k = 0; k < dim_; ++k) d = std::max(d, box->hi[k] - box->lo[k]);
  return d;
}

Kernel box(std::vector<double> lo, std::vector<double> hi, double amplitude) {
  const int d = static_cast<int>(lo.size());
  double volume = 1.0;
  for (int k = 0; k < d && k < static_cast<int>(hi.size()); ++k) volume *= hi[k] - lo[k];
  auto closed = [amplitude, volume](double p) -> std::optional<double> {
    return std::pow(std::abs(amplitude), p) * volume;
  };
  std::vector<std::vector<double>> breaks(d);
  return Kernel(fmt::format("box(amplitude={:.17g})", amplitude), d,
                [amplitude](std::span<const double>) { return amplitude; },
                BoundedBox{std::move(lo), std::move(hi)}, std::move(breaks), closed, false);
}

Kernel unit_box(int dim) {
  check_dim(dim);
  return box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

Kernel tent(int dim, double width, double amplitude) {
  check_dim(dim);
  if (!(width > 0.0)) throw Rejection("tent width must be positive");
  auto f = [width, amplitude](std::span<const double> x) {
    double v = amplitude;
    for (double xi : x) v *= std::max(0.0, 1.0 - std::abs(xi) / width);
    return v;
  };
  auto closed = [dim, width, amplitude](double p) -> std::optional<double> {
    return std::pow(std::abs(amplitude), p) * std::pow(2.0 * width / (p + 1.0), dim);
  };
  std::vector<std::vector<double>> breaks(dim, std::vector<double>{-width, 0.0, width});
  return Kernel(fmt::format("tent(width={:.17g}, amplitude={:.17g})", width, amplitude), dim, f,
                BoundedBox{std::vector<double>(dim, -width), std::vector<double>(dim, width)},
                std::move(breaks), closed);
}

Kernel gaussian_bump(int dim, double rate, double amplitude) {
  check_dim(dim);
  if (!(rate > 0.0)) throw Rejection("gaussian bump rate must be positive");
  auto f = [rate, amplitude](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return amplitude * std::exp(-rate * r2);
  };
  auto closed = [dim, rate, amplitude](double p) -> std::optional<double> {
    return std::pow(std::abs(amplitude), p) * std::pow(kPi / (p * rate), 0.5 * dim);
  };
  return Kernel(fmt::format("gaussian(rate={:.17g}, amplitude={:.17g})", rate, amplitude), dim, f,
                GaussianDecay{std::abs(amplitude), rate}, std::vector<std::vector<double>>(dim),
                closed);
}

Kernel power_law(int dim, double beta, double amplitude) {
  check_dim(dim);
  if (!(beta > 0.0)) throw Rejection("power-law exponent beta must be positive");
  auto f = [beta, amplitude](std::span<const double> x) {
    const double r = euclidean(x);
    return r <= 1.0 ? amplitude : amplitude * std::pow(r, -beta);
  };
  auto closed = [dim, beta, amplitude](double p) -> std::optional<double> {
    if (p * beta <= dim) return std::nullopt;
    const double vd = unit_ball_volume(dim);
    return std::pow(std::abs(amplitude), p) * (vd + dim * vd / (p * beta - dim));
  };
  std::vector<std::vector<double>> breaks(dim, std::vector<double>{-1.0, 0.0, 1.0});
  return Kernel(fmt::format("power(beta={:.17g}, amplitude={:.17g})", beta, amplitude), dim, f,
                PowerDecay{1.0, std::abs(amplitude), beta}, std::move(breaks), closed);
}

Kernel tabulated(std::vector<std::vector<double>> axes, std::vector<double> values) {
  const int d = static_cast<int>(axes.size());
  check_dim(d);
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.size() < 2 || !std::is_sorted(a.begin(), a.end()) ||
        std::adjacent_find(a.begin(), a.end()) != a.end()) {
      throw Rejection("tabulated kernel axes need at least two strictly increasing nodes");
    }
    total *= a.size();
  }
  if (values.size() != total) throw Rejection("tabulated kernel value count does not match grid");
  for (double v : values) {
    if (!std::isfinite(v)) throw Rejection("tabulated kernel values must be finite");
  }

  BoundedBox support;
  for (const auto& a : axes) {
    support.lo.push_back(a.front());
    support.hi.push_back(a.back());
  }
  auto f = [axes, values, d](std::span<const double> x) {
    std::array<std::size_t, 3> cell{};
    std::array<double, 3> frac{};
    for (int k = 0; k < d; ++k) {
      const auto& a = axes[k];
      auto it = std::upper_bound(a.begin(), a.end(), x[k]);
      std::size_t i = (it == a.begin()) ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
      i = std::min(i, a.size() - 2);
      cell[k] = i;
      frac[k] = std::clamp((x[k] - a[i]) / (a[i + 1] - a[i]), 0.0, 1.0);
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
      double w = 1.0;
      std::size_t idx = 0;
      for (int k = 0; k < d; ++k) {
        const bool up = (corner >> k) & 1u;
        w *= up ? frac[k] : 1.0 - frac[k];
        idx = idx * axes[k].size() + cell[k] + (up ? 1 : 0);
      }
      if (w != 0.0) acc += w * values[idx];
    }
    return acc;
  };
  auto breaks = axes;
  return Kernel(fmt::format("tabulated({} nodes)", total), d, f, std::move(support),
                std::move(breaks), {});
}

Kernel load_tabulated(const std::filesystem::path& path, int dim) {
  check_dim(dim);
  std::ifstream in(path);
  if (!in) throw Rejection(fmt::format("cannot open tabulated kernel file '{}'", path.string()));
  std::map<std::vector<double>, double> points;
  std::vector<std::vector<double>> coords(dim);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::vector<double> nums;
    double v;
    while (row >> v) nums.push_back(v);
    if (nums.empty()) continue;
    if (static_cast<int>(nums.size()) != dim + 1 || !row.eof()) {
      throw Rejection(fmt::format("{}:{}: expected {} numbers", path.string(), lineno, dim + 1));
    }
    std::vector<double> key(nums.begin(), nums.begin() + dim);
    for (int k = 0; k < dim; ++k) coords[k].push_back(key[k]);
    points[key] = nums.back();
  }
  for (auto& c : coords) c = sorted_unique(std::move(c));
  std::size_t total = 1;
  for (const auto& c : coords) total *= c.size();
  if (points.size() != total) {
    throw Rejection(fmt::format("{}: rows do not form a complete rectilinear grid", path.string()));
  }
  std::vector<double> values;
  values.reserve(total);
  // std::map orders keys lexicographically, i.e. row-major with the last axis fastest.
  for (const auto& [key, value] : points) values.push_back(value);
  return tabulated(std::move(coords), std::move(values));
}

double eval(const Kernel& kernel, std::span<const double> x) { return kernel(x); }

Estimate power_integral(const Kernel& kernel, double p, const quad::Options& opt) {
  if (!(p > 0.0)) throw Rejection("L^p exponent must be positive");
  const int d = kernel.dim();
  double tail = 0.0;
  if (const auto* env = std::get_if<PowerDecay>(&kernel.support())) {
    if (p * env->exponent <= d) {
      throw Rejection(fmt::format("L^{:.17g} norm diverges: p * beta = {:.17g} <= d = {}", p,
                                  p * env->exponent, d));
    }
    const double r = quad::Axis{}.truncation;
    tail = std::pow(env->constant, p) * d * unit_ball_volume(d) *
           std::pow(r, d - p * env->exponent) / (p * env->exponent - d);
  }
  if (auto closed = kernel.closed_form_power_integral(p)) return {*closed, 0.0};

  const auto axes = domain(kernel);
  auto g = [&](std::span<const double> x) { return std::pow(std::abs(kernel(x)), p); };
  const auto r = quad::integrate_product<double>(g, axes, opt);
  if (!r.converged) {
    throw QuadratureError(fmt::format("L^{} integral of {} did not converge", p, kernel.name()),
                          r.value, r.error);
  }
  return {r.value, r.error + tail};
}

Estimate lp_norm(const Kernel& kernel, double p, const quad::Options& opt) {
  const Estimate i = power_integral(kernel, p, opt);
  const double norm = std::pow(i.value, 1.0 / p);
  const double err = (i.value > 0.0) ? norm * i.error / (p * i.value) : 0.0;
  return {norm, err};
}

std::string IntegrabilityReport::failing() const {
  if (!drift.finite || drift.inconclusive) return "drift-compensation integral";
  if (!gaussian.finite || gaussian.inconclusive) return "gaussian integral b0^2 \\int f^2";
  if (!jumps.finite || jumps.inconclusive) return "jump integral \\int\\int min(1, y^2 f^2)";
  return {};
}

IntegrabilityReport check_lambda_integrable(const Kernel& kernel, const levy::LevyTriplet& triplet,
                                            const quad::Options& opt) {
  quad::Options o = opt;
  o.rel_tol = std::max(o.rel_tol, 1e-8);
  const auto axes = domain(kernel);
  const int d = kernel.dim();
  const auto& nu = triplet.measure;

  auto evaluate = [&](auto&& integrand, bool tail_finite) {
    IntegrabilityCondition c;
    if (!tail_finite) {
      c.value = std::numeric_limits<double>::infinity();
      return c;
    }
    auto g = [&](std::span<const double> x) { return integrand(kernel(x)); };
    const auto r = quad::integrate_product<double>(g, axes, o);
    c.value = r.value;
    c.error = r.error;
    c.inconclusive = !r.converged;
    c.finite = r.converged && std::isfinite(r.value);
    return c;
  };

  // Tail behaviour of each integrand for a power-law envelope |f| ~ |x|^{-beta}.
  bool drift_tail = true;
  bool gauss_tail = true;
  bool jump_tail = true;
  if (const auto* env = std::get_if<PowerDecay>(&kernel.support())) {
    const double beta = env->exponent;
    const double far = triplet.drift + nu.tail_compensation();
    if (std::abs(far) > 1e-14 * (1.0 + std::abs(triplet.drift))) drift_tail = beta > d;
    if (triplet.gaussian > 0.0) gauss_tail = 2.0 * beta > d;
    if (const auto* st = std::get_if<levy::SymmetricStable>(&nu.variant())) {
      jump_tail = st->alpha * beta > d;
    } else if (!nu.is_none()) {
      jump_tail = 2.0 * beta > d;
    }
  }

  IntegrabilityReport rep;
  rep.drift = evaluate(
      [&](double fx) { return std::abs(fx) * std::abs(triplet.drift + nu.compensation(fx)); },
      drift_tail);
  const double b0 = triplet.gaussian;
  if (b0 == 0.0) {
    rep.gaussian = {true, false, 0.0, 0.0};
  } else {
    rep.gaussian = evaluate([&](double fx) { return b0 * b0 * fx * fx; }, gauss_tail);
  }
  if (nu.is_none()) {
    rep.jumps = {true, false, 0.0, 0.0};
  } else {
    rep.jumps = evaluate([&](double fx) { return nu.small_big(fx); }, jump_tail);
  }
  return rep;
}

std::vector<quad::Axis> domain(const Kernel& kernel) {
  std::vector<quad::Axis> axes(kernel.dim());
  const bool unbounded = !kernel.bounded();
  for (int k = 0; k < kernel.dim(); ++k) {
    axes[k].breaks = kernel.breaks(k);
    axes[k].lower_infinite = unbounded;
    axes[k].upper_infinite = unbounded;
  }
  return axes;
}

std::optional<std::vector<quad::Axis>> pair_domain(const Kernel& kernel, std::span<const double> t,
                                                   Combine mode) {
  const int d = kernel.dim();
  std::vector<quad::Axis> axes(d);
  const auto* box = std::get_if<BoundedBox>(&kernel.support());
  for (int k = 0; k < d; ++k) {
    std::vector<double> pts;
    for (double b : kernel.breaks(k)) {
      pts.push_back(-b);         // kinks of f(-x)
      pts.push_back(t[k] - b);   // kinks of f(t - x)
    }
    pts = sorted_unique(std::move(pts));
    if (box && mode == Combine::Intersection) {
      const double lo = std::max(-box->hi[k], t[k] - box->hi[k]);
      const double hi = std::min(-box->lo[k], t[k] - box->lo[k]);
      if (!(lo < hi)) return std::nullopt;
      std::erase_if(pts, [&](double v) { return v <= lo || v >= hi; });
      pts.insert(pts.begin(), lo);
      pts.push_back(hi);
    }
    axes[k].breaks = std::move(pts);
    axes[k].lower_infinite = !box;
    axes[k].upper_infinite = !box;
  }
  return axes;
}

}  // namespace srd::kernels
