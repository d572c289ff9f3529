#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace srd {

/// Inputs that make the requested quantity meaningless (degenerate
/// integrator, zero kernel, divergent norm, unsupported family).
class Rejection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature ran out of budget. Carries the partial value and the
/// residual error estimate at the point it gave up.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double partial, double residual)
      : std::runtime_error(what + " (partial " + format(partial) + ", residual " +
                           format(residual) + ")"),
        partial_(partial),
        residual_(residual) {}

  double partial() const noexcept { return partial_; }
  double residual() const noexcept { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double partial_;
  double residual_;
};

/// A value with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

}  // namespace srd
