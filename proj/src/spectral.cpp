#include "srd/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "srd/csv.hpp"
#include "srd/parallel.hpp"

namespace srd::spectral {
namespace {

using Point = std::array<double, 3>;

// f(-x) and f(t - x) at the same x.
struct PairEval {
  const Kernel& kernel;
  std::span<const double> t;

  std::pair<double, double> operator()(std::span<const double> x) const {
    Point neg{};
    Point shifted{};
    for (std::size_t k = 0; k < x.size(); ++k) {
      neg[k] = -x[k];
      shifted[k] = t[k] - x[k];
    }
    const std::size_t d = x.size();
    return {kernel(std::span<const double>(shifted.data(), d)),
            kernel(std::span<const double>(neg.data(), d))};
  }
};

void require_dim(const Kernel& kernel, std::span<const double> t) {
  if (static_cast<int>(t.size()) != kernel.dim()) {
    throw Rejection(fmt::format("lag has {} coordinates, kernel dimension is {}", t.size(),
                                kernel.dim()));
  }
}

// Results that miss the requested tolerance are still used, with their
// error estimate, as long as they are accurate to this relative level.
constexpr double kAcceptRel = 1e-6;

template <class T>
void require_converged(const quad::Result<T>& r, const std::string& what) {
  if (!r.converged && r.error > std::max(1e-14, kAcceptRel * std::abs(r.value))) {
    throw QuadratureError(what + " did not converge", std::abs(r.value), r.error);
  }
}

class SigmaCache {
 public:
  SigmaCache(const Kernel& k, const LevyTriplet& t, const quad::Options& o)
      : kernel_(k), triplet_(t), opt_(o) {}

  Estimate operator()(double s) {
    s = std::abs(s);
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    const Estimate e = sigma_f_sq(kernel_, triplet_, s, opt_);
    cache_.emplace(s, e);
    return e;
  }

 private:
  const Kernel& kernel_;
  const LevyTriplet& triplet_;
  const quad::Options& opt_;
  std::map<double, Estimate> cache_;
};

Estimate rho_from_parts(const Estimate& num, const Estimate& sig1, const Estimate& sig2) {
  if (!(sig1.value > 0.0) || !(sig2.value > 0.0)) {
    throw Rejection("rho_t undefined: sigma_f(s) vanishes (s = 0 or kernel a.e. zero)");
  }
  const double denom = std::sqrt(sig1.value) * std::sqrt(sig2.value);
  double rho = num.value / denom;
  const double err = num.error / denom +
                     rho * 0.5 * (sig1.error / sig1.value + sig2.error / sig2.value);
  if (rho > 1.0 + 1e-9) {
    throw QuadratureError(fmt::format("rho_t overshoots 1 by {:.3g}", rho - 1.0), rho, err);
  }
  rho = std::clamp(rho, 0.0, 1.0);
  return {rho, err};
}

}  // namespace

Estimate sigma_f_sq(const Kernel& kernel, const LevyTriplet& triplet, double s,
                    const quad::Options& opt) {
  if (s == 0.0) return {0.0, 0.0};
  const auto axes = kernels::domain(kernel);
  auto g = [&](std::span<const double> x) {
    const double fx = kernel(x);
    return fx == 0.0 ? 0.0 : levy::eval_ReK(triplet, s * fx, opt);
  };
  const auto r = quad::integrate_product<double>(g, axes, opt);
  require_converged(r, fmt::format("sigma_f^2({})", s));
  return {std::max(r.value, 0.0), r.error};
}

ComplexEstimate char_X0(const Kernel& kernel, const LevyTriplet& triplet, double u,
                        const quad::Options& opt) {
  if (u == 0.0) return {{1.0, 0.0}, 0.0};
  const auto axes = kernels::domain(kernel);
  auto g = [&](std::span<const double> x) {
    const double fx = kernel(x);
    return fx == 0.0 ? std::complex<double>{} : levy::eval_K(triplet, u * fx, opt).complex();
  };
  const auto r = quad::integrate_product<std::complex<double>>(g, axes, opt);
  require_converged(r, fmt::format("characteristic exponent at u={}", u));
  const std::complex<double> phi = std::exp(-r.value);
  return {phi, std::abs(phi) * r.error};
}

ComplexEstimate char_joint(const Kernel& kernel, const LevyTriplet& triplet,
                           std::span<const double> t, double s1, double s2,
                           const quad::Options& opt) {
  require_dim(kernel, t);
  if (s1 == 0.0) return char_X0(kernel, triplet, s2, opt);
  if (s2 == 0.0) return char_X0(kernel, triplet, s1, opt);
  const auto axes = kernels::pair_domain(kernel, t, kernels::Combine::Union);
  const PairEval pair{kernel, t};
  auto g = [&](std::span<const double> x) {
    const auto [ft, f0] = pair(x);
    const double arg = s1 * ft + s2 * f0;
    return arg == 0.0 ? std::complex<double>{} : levy::eval_K(triplet, arg, opt).complex();
  };
  const auto r = quad::integrate_product<std::complex<double>>(g, *axes, opt);
  require_converged(r, "joint characteristic exponent");
  const std::complex<double> phi = std::exp(-r.value);
  return {phi, std::abs(phi) * r.error};
}

Estimate cross_integral(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
                        double s1, double s2, const quad::Options& opt) {
  require_dim(kernel, t);
  const auto axes = kernels::pair_domain(kernel, t, kernels::Combine::Intersection);
  if (!axes || s1 == 0.0 || s2 == 0.0) return {0.0, 0.0};
  const PairEval pair{kernel, t};
  auto g = [&](std::span<const double> x) {
    const auto [ft, f0] = pair(x);
    if (ft == 0.0 || f0 == 0.0) return 0.0;
    return std::sqrt(levy::eval_ReK(triplet, s1 * ft, opt) * levy::eval_ReK(triplet, s2 * f0, opt));
  };
  const auto r = quad::integrate_product<double>(g, *axes, opt);
  require_converged(r, "rho_t cross integral");
  return {r.value, r.error};
}

Estimate rho_t(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
               double s1, double s2, const quad::Options& opt) {
  const Estimate sig1 = sigma_f_sq(kernel, triplet, s1, opt);
  const Estimate sig2 = sigma_f_sq(kernel, triplet, s2, opt);
  if (!(sig1.value > 0.0) || !(sig2.value > 0.0)) {
    throw Rejection("rho_t undefined: sigma_f(s) vanishes (s = 0 or kernel a.e. zero)");
  }
  return rho_from_parts(cross_integral(kernel, triplet, t, s1, s2, opt), sig1, sig2);
}

namespace {

void check_search(const SearchOptions& s) {
  if (!(s.s_min > 0.0) || !(s.s_max > s.s_min) || s.points < 2 || s.refine_rounds < 0) {
    throw Rejection("invalid s search box: need 0 < s_min < s_max, points >= 2, rounds >= 0");
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + step * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace

std::vector<double> rho_grid(const Kernel& kernel, const LevyTriplet& triplet,
                             std::span<const double> t, const SearchOptions& search,
                             const quad::Options& opt) {
  check_search(search);
  require_dim(kernel, t);
  SigmaCache sigma(kernel, triplet, opt);
  const auto grid = log_grid(search.s_min, search.s_max, search.points);
  std::vector<double> out;
  out.reserve(grid.size() * grid.size());
  for (double a : grid) {
    for (double b : grid) {
      out.push_back(
          rho_from_parts(cross_integral(kernel, triplet, t, a, b, opt), sigma(a), sigma(b)).value);
    }
  }
  return out;
}

RhoTilde rho_tilde(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
                   const SearchOptions& search, const quad::Options& opt) {
  check_search(search);
  require_dim(kernel, t);
  SigmaCache sigma(kernel, triplet, opt);
  RhoTilde out;

  auto eval = [&](double a, double b) {
    ++out.evaluations;
    return rho_from_parts(cross_integral(kernel, triplet, t, a, b, opt), sigma(a), sigma(b));
  };

  const bool homogeneous = levy::homogeneity_exponent(triplet).has_value();
  if ((homogeneous || search.declared_s_independent) && !search.force_search) {
    const Estimate r = eval(1.0, 1.0);
    out.value = r.value;
    out.error = r.error;
    out.s_independent = true;
    return out;
  }

  out.grid_approximate = true;
  const double lo = std::log(search.s_min);
  const double hi = std::log(search.s_max);
  const double step = (hi - lo) / (search.points - 1);
  double best_a = 0.0;
  double best_b = 0.0;
  Estimate best{-1.0, 0.0};
  const auto grid = log_grid(search.s_min, search.s_max, search.points);
  for (int i = 0; i < search.points; ++i) {
    for (int j = 0; j < search.points; ++j) {
      const Estimate r = eval(grid[i], grid[j]);
      if (r.value > best.value) {
        best = r;
        best_a = std::log(grid[i]);
        best_b = std::log(grid[j]);
      }
    }
  }
  double h = step;
  for (int round = 0; round < search.refine_rounds; ++round) {
    h *= 0.5;
    const double ca = best_a;
    const double cb = best_b;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const double a = std::clamp(ca + di * h, lo, hi);
        const double b = std::clamp(cb + dj * h, lo, hi);
        const Estimate r = eval(std::exp(a), std::exp(b));
        if (r.value > best.value) {
          best = r;
          best_a = a;
          best_b = b;
        }
      }
    }
  }
  out.value = best.value;
  out.error = best.error;
  out.s1 = std::exp(best_a);
  out.s2 = std::exp(best_b);
  return out;
}

SpectralProfile SpectralProfile::build(const Kernel& kernel, const LevyTriplet& triplet,
                                       const ProfileOptions& options) {
  if (!(options.s_min > 0.0) || !(options.s_max > options.s_min) || options.s_points < 3) {
    throw Rejection("profile s-grid needs 0 < s_min < s_max and at least 3 points");
  }
  if (!(options.window > 0.0) || !(options.t_step > 0.0) || options.t_step > options.window) {
    throw Rejection("profile lattice needs 0 < t_step <= window");
  }
  check_search(options.search);

  SpectralProfile p(kernel, triplet, options);
  const auto& k = p.kernel_;
  const auto& tr = p.triplet_;
  const auto& opt = p.options_.quad;

  p.s_ = log_grid(options.s_min, options.s_max, options.s_points);
  p.sigma_sq_.resize(p.s_.size());
  p.sigma_err_.resize(p.s_.size());
  parallel_for(p.s_.size(), options.threads, [&](std::size_t i) {
    const Estimate e = sigma_f_sq(k, tr, p.s_[i], opt);
    p.sigma_sq_[i] = e.value;
    p.sigma_err_[i] = e.error;
  });
  for (std::size_t i = 0; i < p.s_.size(); ++i) {
    if (!(p.sigma_sq_[i] > 0.0)) {
      throw Rejection(fmt::format(
          "sigma_f^2({:.6g}) = 0: the kernel is a.e. zero or Re K vanishes, so the field is "
          "deterministic",
          p.s_[i]));
    }
  }

  p.s_independent_ =
      (levy::homogeneity_exponent(tr).has_value() || options.search.declared_s_independent) &&
      !options.search.force_search;
  p.grid_approximate_ = !p.s_independent_;

  const int d = k.dim();
  p.step_ = options.t_step;
  p.half_count_ = static_cast<int>(std::lround(options.window / options.t_step));
  const int side = 2 * p.half_count_ + 1;
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(side);
  p.t_points_.resize(total * d);
  p.shell_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    int shell = 0;
    for (int j = d - 1; j >= 0; --j) {
      const int idx = static_cast<int>(rem % side) - p.half_count_;
      rem /= side;
      p.t_points_[i * d + j] = idx * p.step_;
      shell = std::max(shell, std::abs(idx));
    }
    p.shell_[i] = shell;
  }

  // ρ̃_{-t} = ρ̃_t (swap s1 and s2), and index total-1-i is the mirror of i.
  p.rho_.resize(total);
  p.rho_err_.resize(total);
  const std::size_t half = total / 2 + 1;
  parallel_for(half, options.threads, [&](std::size_t i) {
    const RhoTilde r = spectral::rho_tilde(k, tr, p.t_point(i), options.search, opt);
    p.rho_[i] = r.value;
    p.rho_err_[i] = r.error;
    p.rho_[total - 1 - i] = r.value;
    p.rho_err_[total - 1 - i] = r.error;
  });
  return p;
}

Estimate SpectralProfile::sigma_sq_at(double s) const {
  return sigma_f_sq(kernel_, triplet_, s, options_.quad);
}

double SpectralProfile::cell_volume() const { return std::pow(step_, dim()); }

std::span<const double> SpectralProfile::t_point(std::size_t i) const {
  const std::size_t d = static_cast<std::size_t>(dim());
  return std::span<const double>(t_points_.data() + i * d, d);
}

void SpectralProfile::write_sigma_csv(std::ostream& os) const {
  csv::Writer w(os, {"s", "sigma_sq", "err"});
  for (std::size_t i = 0; i < s_.size(); ++i) {
    w.row({csv::number(s_[i]), csv::number(sigma_sq_[i]), csv::number(sigma_err_[i])});
  }
}

void SpectralProfile::write_rho_csv(std::ostream& os) const {
  std::vector<std::string> header;
  for (int j = 1; j <= dim(); ++j) header.push_back(fmt::format("t{}", j));
  header.push_back("rho_tilde");
  header.push_back("err");
  csv::Writer w(os, header);
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    std::vector<std::string> row;
    for (double v : t_point(i)) row.push_back(csv::number(v));
    row.push_back(csv::number(rho_[i]));
    row.push_back(csv::number(rho_err_[i]));
    w.row(row);
  }
}

}  // namespace srd::spectral
