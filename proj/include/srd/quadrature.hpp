#pragma once

// Globally adaptive Gauss-Kronrod (G7/K15) quadrature, with product
// integration over axis-aligned domains in up to three dimensions.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace srd::quad {

struct Options {
  double abs_tol = 1e-15;
  double rel_tol = 1e-11;
  std::size_t max_intervals = 2000;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

// A value together with the integrated absolute error of the inner
// integral that produced it; used to propagate errors through nesting.
template <class T>
struct Carried {
  T value{};
  double error = 0.0;

  Carried& operator+=(const Carried& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
  friend Carried operator+(Carried a, const Carried& b) { return a += b; }
  friend Carried operator-(Carried a, const Carried& b) {
    a.value -= b.value;
    a.error -= b.error;
    return a;
  }
  friend Carried operator*(double w, Carried a) {
    a.value *= w;
    a.error *= w;
    return a;
  }
};

template <class T>
double magnitude(const Carried<T>& c) {
  return magnitude(c.value);
}

namespace detail {

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a;
  double b;
  T value;
  double error;
};

template <class T, class F>
Segment<T> kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);

  std::array<T, 15> fv;
  fv[7] = f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = f(center - dx);
    fv[14 - j] = f(center + dx);
  }

  T res_k = kWgk[7] * fv[7];
  T res_g = kWg[3] * fv[7];
  double res_abs = kWgk[7] * magnitude(fv[7]);
  for (int j = 0; j < 7; ++j) {
    const T pair = fv[j] + fv[14 - j];
    res_k += kWgk[j] * pair;
    res_abs += kWgk[j] * (magnitude(fv[j]) + magnitude(fv[14 - j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * pair;
  }
  const T mean = 0.5 * res_k;
  double res_asc = kWgk[7] * magnitude(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kWgk[j] * (magnitude(fv[j] - mean) + magnitude(fv[14 - j] - mean));
  }

  double err = magnitude(res_k - res_g) * abs_half;
  res_asc *= abs_half;
  res_abs *= abs_half;
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  if (res_abs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
  return {a, b, half * res_k, err};
}

}  // namespace detail

/// Integrates f over [a, b] (finite) with global bisection of the
/// interval carrying the largest error estimate.
template <class T, class F>
Result<T> integrate(F&& f, double a, double b, const Options& opt = {}) {
  using detail::Segment;
  Result<T> out;
  if (a == b) return out;

  auto worse = [](const Segment<T>& l, const Segment<T>& r) { return l.error < r.error; };
  std::vector<Segment<T>> heap;
  heap.reserve(64);
  heap.push_back(detail::kronrod15<T>(f, a, b));
  out.evaluations = 15;

  T total = heap.front().value;
  double total_err = heap.front().error;
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * magnitude(total)); };

  bool roundoff = false;
  while (total_err > tolerance() && heap.size() < opt.max_intervals) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Segment<T> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (std::abs(worst.b - worst.a) <= 1e-13 * (std::abs(mid) + 1e-300) || mid == worst.a ||
        mid == worst.b) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), worse);
      roundoff = true;
      break;
    }
    Segment<T> left = detail::kronrod15<T>(f, worst.a, mid);
    Segment<T> right = detail::kronrod15<T>(f, mid, worst.b);
    out.evaluations += 30;
    total += (left.value + right.value) - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // Re-sum from the segments to avoid drift in the running totals.
  total = T{};
  total_err = 0.0;
  for (const auto& s : heap) {
    total += s.value;
    total_err += s.error;
  }
  out.value = total;
  out.error = total_err;
  out.converged = !roundoff && total_err <= tolerance();
  return out;
}

/// One coordinate axis of an integration domain. The integrand is assumed
/// smooth between consecutive break points. Unbounded sides are mapped to a
/// logarithmic variable and truncated at |x| = truncation.
struct Axis {
  std::vector<double> breaks;
  bool lower_infinite = false;
  bool upper_infinite = false;
  double truncation = 1e15;
};

/// Integrates f over a single axis, summing its panels.
template <class T, class F>
Result<T> integrate_axis(F&& f, const Axis& axis, const Options& opt = {}) {
  Result<T> out;
  if (axis.breaks.empty()) return out;
  auto absorb = [&](const Result<T>& r) {
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    out.evaluations += r.evaluations;
  };

  const double lo = axis.breaks.front();
  const double hi = axis.breaks.back();
  if (axis.lower_infinite) {
    // x = lo + 1 - e^v, v in [0, V]
    const double vmax = std::log(std::max(axis.truncation + lo + 1.0, 2.0));
    auto g = [&](double v) {
      const double ev = std::exp(v);
      return ev * f(lo + 1.0 - ev);
    };
    absorb(integrate<T>(g, 0.0, vmax, opt));
  }
  for (std::size_t i = 0; i + 1 < axis.breaks.size(); ++i) {
    absorb(integrate<T>(f, axis.breaks[i], axis.breaks[i + 1], opt));
  }
  if (axis.upper_infinite) {
    const double vmax = std::log(std::max(axis.truncation - hi + 1.0, 2.0));
    auto g = [&](double v) {
      const double ev = std::exp(v);
      return ev * f(hi - 1.0 + ev);
    };
    absorb(integrate<T>(g, 0.0, vmax, opt));
  }
  // A panel may miss its own relative target while the sum meets it.
  if (out.error <= std::max(opt.abs_tol, opt.rel_tol * magnitude(out.value))) out.converged = true;
  return out;
}

/// Product integration over the Cartesian product of the given axes
/// (1 to 3 of them). f receives the full point as a span.
template <class T, class F>
Result<T> integrate_product(F&& f, std::span<const Axis> axes, const Options& opt = {}) {
  if (axes.empty() || axes.size() > 3) {
    throw std::invalid_argument("product quadrature supports 1 to 3 axes");
  }
  std::array<double, 3> point{};
  const std::size_t dim = axes.size();

  auto level = [&](auto&& self, std::size_t k) -> Result<T> {
    if (k + 1 == dim) {
      auto g = [&](double x) {
        point[k] = x;
        return f(std::span<const double>(point.data(), dim));
      };
      return integrate_axis<T>(g, axes[k], opt);
    }
    bool inner_ok = true;
    std::size_t inner_evals = 0;
    auto g = [&](double x) {
      point[k] = x;
      const Result<T> r = self(self, k + 1);
      inner_ok = inner_ok && r.converged;
      inner_evals += r.evaluations;
      return Carried<T>{r.value, r.error};
    };
    const Result<Carried<T>> outer = integrate_axis<Carried<T>>(g, axes[k], opt);
    Result<T> out;
    out.value = outer.value.value;
    out.error = outer.error + std::abs(outer.value.error);
    out.converged = (outer.converged && inner_ok) ||
                    out.error <= std::max(opt.abs_tol, opt.rel_tol * magnitude(out.value));
    out.evaluations = inner_evals;
    return out;
  };
  return level(level, 0);
}

}  // namespace srd::quad
