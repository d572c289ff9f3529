#include "srd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "srd/certify.hpp"
#include "srd/csv.hpp"
#include "srd/parallel.hpp"
#include "srd/rng.hpp"

namespace srd::simulate {
namespace {

constexpr std::size_t kBatches = 20;

std::size_t cells_per_axis(const SimConfig& c) {
  const double n = 2.0 * c.window / c.h;
  return static_cast<std::size_t>(std::llround(n));
}

// Columns are t = 0 followed by the lags.
std::vector<std::vector<double>> column_points(const SimConfig& c, int dim) {
  std::vector<std::vector<double>> pts;
  pts.emplace_back(dim, 0.0);
  for (const auto& l : c.lags) pts.push_back(l);
  return pts;
}

// One cell increment Λ_j of volume `vol`.
class IncrementSampler {
 public:
  IncrementSampler(const LevyTriplet& tr, double vol) : mean_(tr.drift * vol) {
    sd_ = std::sqrt(tr.gaussian * vol);
    const auto& v = tr.measure.variant();
    if (const auto* st = std::get_if<levy::SymmetricStable>(&v)) {
      alpha_ = st->alpha;
      stable_scale_ = std::pow(vol * st->scale * levy::stable_constant(st->alpha), 1.0 / st->alpha);
    } else if (const auto* cp = std::get_if<levy::CompoundPoisson>(&v)) {
      cp_ = cp;
      rate_ = cp->rate * vol;
      cumulative_.resize(cp->weights.size());
      std::partial_sum(cp->weights.begin(), cp->weights.end(), cumulative_.begin());
      double small = 0.0;
      for (std::size_t k = 0; k < cp->atoms.size(); ++k) {
        if (std::abs(cp->atoms[k]) <= 1.0) small += cp->weights[k] * cp->atoms[k];
      }
      mean_ -= rate_ * small;
    } else if (std::holds_alternative<levy::Tabulated>(v)) {
      throw Rejection("simulation supports Gaussian, symmetric stable and compound Poisson parts only");
    }
  }

  double operator()(CounterRng& rng, std::normal_distribution<double>& normal,
                    std::poisson_distribution<long>* poisson) const {
    double x = mean_;
    if (sd_ > 0.0) x += sd_ * normal(rng);
    if (alpha_ > 0.0) x += stable_scale_ * symmetric_stable(alpha_, rng.uniform_open(), rng.uniform_open());
    if (cp_ != nullptr) {
      const long n = (*poisson)(rng);
      for (long k = 0; k < n; ++k) {
        const double u = rng.uniform_open() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(), cp_->atoms.size() - 1);
        x += cp_->atoms[idx];
      }
    }
    return x;
  }

  double poisson_rate() const { return rate_; }

 private:
  double mean_;
  double sd_ = 0.0;
  double alpha_ = 0.0;
  double stable_scale_ = 0.0;
  const levy::CompoundPoisson* cp_ = nullptr;
  double rate_ = 0.0;
  std::vector<double> cumulative_;
};

}  // namespace

void validate(const SimConfig& c, const Kernel& kernel) {
  if (!(c.h > 0.0) || !(c.window > 0.0)) throw Rejection("simulation needs h > 0 and window > 0");
  if (c.h > c.window) throw Rejection("simulation needs h <= window");
  if (c.samples == 0) throw Rejection("simulation needs at least one sample");
  const double n = 2.0 * c.window / c.h;
  if (std::abs(n - std::round(n)) > 1e-9 * n) {
    throw Rejection(fmt::format("2 * window / h = {} is not an integer", n));
  }
  const int d = kernel.dim();
  for (const auto& l : c.lags) {
    if (static_cast<int>(l.size()) != d) throw Rejection("lag dimension does not match the kernel");
  }
  const double eps = 1e-12 * c.window;
  for (const auto& t : column_points(c, d)) {
    if (const auto* box = std::get_if<kernels::BoundedBox>(&kernel.support())) {
      const double diam = kernel.support_diameter();
      for (int k = 0; k < d; ++k) {
        if (t[k] - box->hi[k] - diam < -c.window - eps || t[k] - box->lo[k] + diam > c.window + eps) {
          throw Rejection(fmt::format(
              "window {} does not contain the support of f(t - .) at lag component {} with margin {}",
              c.window, t[k], diam));
        }
      }
    } else {
      double r = 0.0;
      if (const auto* g = std::get_if<kernels::GaussianDecay>(&kernel.support())) {
        r = std::sqrt(std::log(1e12) / g->rate);
      } else {
        r = std::get<kernels::PowerDecay>(kernel.support()).radius;
      }
      for (int k = 0; k < d; ++k) {
        if (std::abs(t[k]) + 2.0 * r > c.window + eps) {
          throw Rejection(fmt::format("window {} is smaller than |t| + 2 * {} (effective radius)",
                                      c.window, r));
        }
      }
    }
  }
}

double symmetric_stable(double alpha, double u1, double u2) {
  const double v = std::numbers::pi * (u1 - 0.5);
  if (alpha == 1.0) return std::tan(v);
  const double w = -std::log(u2);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

FieldSample sample_field(const Kernel& kernel, const LevyTriplet& triplet, const SimConfig& config) {
  validate(config, kernel);
  const int d = kernel.dim();
  const auto pts = column_points(config, d);
  const std::size_t cols = pts.size();
  const std::size_t per_axis = cells_per_axis(config);
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= per_axis;
  const double vol = std::pow(config.h, d);
  const IncrementSampler increment(triplet, vol);

  // Weights f(t_c - x_j) for the cells that reach at least one column.
  std::vector<double> weights;
  std::vector<double> x(d);
  std::vector<double> arg(d);
  std::vector<double> row(cols);
  for (std::size_t j = 0; j < total; ++j) {
    std::size_t rest = j;
    for (int k = d - 1; k >= 0; --k) {
      x[k] = -config.window + (static_cast<double>(rest % per_axis) + 0.5) * config.h;
      rest /= per_axis;
    }
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      for (int k = 0; k < d; ++k) arg[k] = pts[c][k] - x[k];
      row[c] = kernels::eval(kernel, arg);
      any = any || row[c] != 0.0;
    }
    if (any) weights.insert(weights.end(), row.begin(), row.end());
  }
  const std::size_t cells = weights.size() / cols;

  FieldSample out;
  out.rows = config.samples;
  out.cols = cols;
  out.values.assign(out.rows * cols, 0.0);
  out.config = config;
  out.kernel = kernel.name();
  out.triplet = triplet.describe();

  parallel_for(config.samples, config.threads, [&](std::size_t r) {
    CounterRng rng(config.seed, r);
    std::normal_distribution<double> normal;
    std::poisson_distribution<long> poisson(increment.poisson_rate() > 0.0 ? increment.poisson_rate() : 1.0);
    double* dst = out.values.data() + r * cols;
    for (std::size_t j = 0; j < cells; ++j) {
      const double lam = increment(rng, normal, &poisson);
      const double* w = weights.data() + j * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += w[c] * lam;
    }
  });
  return out;
}

void FieldSample::write_csv(std::ostream& os) const {
  std::vector<std::string> header;
  for (std::size_t c = 0; c < cols; ++c) header.push_back(fmt::format("x{}", c));
  csv::Writer w(os, header);
  std::vector<std::string> fields(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) fields[c] = csv::number(at(r, c));
    w.row(fields);
  }
}

std::complex<double> empirical_char(const FieldSample& s, double s1, double s2, std::size_t lag) {
  if (lag + 1 >= s.cols) throw std::out_of_range("lag index out of range");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    const double a = s1 * s.at(r, lag + 1) + s2 * s.at(r, 0);
    re += std::cos(a);
    im += std::sin(a);
  }
  return {re / s.rows, im / s.rows};
}

std::complex<double> empirical_char_X0(const FieldSample& s, double u) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    re += std::cos(u * s.at(r, 0));
    im += std::sin(u * s.at(r, 0));
  }
  return {re / s.rows, im / s.rows};
}

double indicator_cov(const FieldSample& s, std::size_t lag, double u, double v) {
  if (lag + 1 >= s.cols) throw std::out_of_range("lag index out of range");
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t ab = 0;
  for (std::size_t r = 0; r < s.rows; ++r) {
    const bool x = s.at(r, lag + 1) > u;
    const bool y = s.at(r, 0) > v;
    a += x;
    b += y;
    ab += x && y;
  }
  const double n = static_cast<double>(s.rows);
  return ab / n - (a / n) * (b / n);
}

TestMeasure::TestMeasure(Variant v) : v_(std::move(v)) {
  if (const auto* p = std::get_if<PointMass>(&v_)) {
    atoms_ = {p->at};
    weights_ = {1.0};
  } else if (const auto* dm = std::get_if<Discrete>(&v_)) {
    if (dm->atoms.empty() || dm->atoms.size() != dm->weights.size()) {
      throw Rejection("discrete test measure needs matching non-empty atoms and weights");
    }
    double sum = 0.0;
    for (double w : dm->weights) {
      if (!(w >= 0.0)) throw Rejection("test measure weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw Rejection("test measure weights must sum to 1");
    atoms_ = dm->atoms;
    weights_ = dm->weights;
  } else {
    const auto& g = std::get<GaussianQuantiles>(v_);
    if (!(g.stddev > 0.0)) throw Rejection("gaussian test measure needs stddev > 0");
    const boost::math::normal_distribution<double> n(g.mean, g.stddev);
    for (std::size_t k = 0; k < kQuantilePoints; ++k) {
      atoms_.push_back(boost::math::quantile(n, (k + 0.5) / kQuantilePoints));
      weights_.push_back(1.0 / kQuantilePoints);
    }
  }
}

std::string TestMeasure::describe() const {
  if (const auto* p = std::get_if<PointMass>(&v_)) return fmt::format("point-mass({})", p->at);
  if (std::holds_alternative<Discrete>(v_)) return fmt::format("discrete({} atoms)", atoms_.size());
  const auto& g = std::get<GaussianQuantiles>(v_);
  return fmt::format("gaussian-quantiles(mean={}, sd={}, n={})", g.mean, g.stddev, kQuantilePoints);
}

std::complex<double> TestMeasure::char_fn(double s) const {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) acc += weights_[k] * std::polar(1.0, s * atoms_[k]);
  return acc;
}

bool TestMeasure::char_bounded(std::span<const double> grid) const {
  return std::all_of(grid.begin(), grid.end(),
                     [&](double s) { return std::abs(char_fn(s)) <= 1.0 + 1e-12; });
}

Lemma3Result lemma3_gap(const Kernel& kernel, const LevyTriplet& triplet, std::span<const double> t,
                        double s1, double s2, const quad::Options& opt) {
  const auto joint = spectral::char_joint(kernel, triplet, t, s1, s2, opt);
  const auto m1 = spectral::char_X0(kernel, triplet, s1, opt);
  const auto m2 = spectral::char_X0(kernel, triplet, s2, opt);
  const double sig1 = spectral::sigma_f_sq(kernel, triplet, s1, opt).value;
  const double sig2 = spectral::sigma_f_sq(kernel, triplet, s2, opt).value;
  const double cross = spectral::cross_integral(kernel, triplet, t, s1, s2, opt).value;
  Lemma3Result r;
  r.gap = std::abs(joint.value - m1.value * m2.value);
  // \int (a - b)² = σ²(s1) + σ²(s2) - 2 \int ab, by translation invariance.
  const double sq = std::max(0.0, sig1 + sig2 - 2.0 * cross);
  r.bound = std::exp(-sq) * 2.0 * cross;
  r.satisfied = r.gap <= r.bound + 1e-8;
  return r;
}

Lemma3Sweep lemma3_sweep(const Kernel& kernel, const LevyTriplet& triplet, std::size_t draws,
                         std::uint64_t seed, double t_max, const quad::Options& opt) {
  Lemma3Sweep out;
  out.draws = draws;
  CounterRng rng(seed, 0x1e3a3);
  std::vector<double> t(kernel.dim());
  auto draw_s = [&] {
    const double mag = std::pow(10.0, -2.0 + 4.0 * rng.uniform_open());
    return rng.uniform_open() < 0.5 ? -mag : mag;
  };
  for (std::size_t i = 0; i < draws; ++i) {
    for (auto& v : t) v = t_max * (2.0 * rng.uniform_open() - 1.0);
    const double s1 = draw_s();
    const double s2 = draw_s();
    const auto r = lemma3_gap(kernel, triplet, t, s1, s2, opt);
    if (!r.satisfied) ++out.violations;
    out.max_ratio = std::max(out.max_ratio, r.gap / (r.bound + 1e-8));
  }
  return out;
}

double lemma4_lhs(const FieldSample& s, std::size_t lag, const TestMeasure& mu,
                  double* standard_error) {
  if (lag + 1 >= s.cols) throw std::out_of_range("lag index out of range");
  std::vector<std::size_t> order(mu.atoms().size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return mu.atoms()[a] < mu.atoms()[b]; });
  std::vector<double> atoms;
  std::vector<double> w;
  for (auto i : order) {
    atoms.push_back(mu.atoms()[i]);
    w.push_back(mu.weights()[i]);
  }
  const std::size_t m = atoms.size();
  const std::size_t side = m + 1;

  // rank = #{atoms strictly below x}; 1{x > u_a} = 1{a < rank}.
  auto rank = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(atoms.begin(), atoms.end(), x) - atoms.begin());
  };
  auto lhs_of = [&](std::size_t begin, std::size_t end) {
    std::vector<double> hist(side * side, 0.0);
    for (std::size_t r = begin; r < end; ++r) hist[rank(s.at(r, lag + 1)) * side + rank(s.at(r, 0))] += 1.0;
    // Suffix sums: joint[a][b] = #{rank_t > a, rank_0 > b} for a, b < m.
    std::vector<double> suffix((side + 1) * (side + 1), 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return suffix[i * (side + 1) + j]; };
    for (std::size_t i = side; i-- > 0;) {
      for (std::size_t j = side; j-- > 0;) {
        at(i, j) = hist[i * side + j] + at(i + 1, j) + at(i, j + 1) - at(i + 1, j + 1);
      }
    }
    const double n = static_cast<double>(end - begin);
    double acc = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      const double pt = at(a + 1, 0) / n;
      for (std::size_t b = 0; b < m; ++b) {
        const double p0 = at(0, b + 1) / n;
        acc += w[a] * w[b] * std::abs(at(a + 1, b + 1) / n - pt * p0);
      }
    }
    return acc;
  };

  const double lhs = lhs_of(0, s.rows);
  if (standard_error) {
    *standard_error = 0.0;
    if (s.rows >= 2 * kBatches) {
      std::vector<double> b(kBatches);
      for (std::size_t i = 0; i < kBatches; ++i) {
        b[i] = lhs_of(i * s.rows / kBatches, (i + 1) * s.rows / kBatches);
      }
      const double mean = std::accumulate(b.begin(), b.end(), 0.0) / kBatches;
      double var = 0.0;
      for (double v : b) var += (v - mean) * (v - mean);
      var /= kBatches - 1;
      *standard_error = std::sqrt(var / kBatches);
    }
  }
  return lhs;
}

Lemma4Result lemma4_check(const FieldSample& sample, std::size_t lag, const TestMeasure& mu,
                          const spectral::SpectralProfile& profile, double rho_bar) {
  if (lag >= sample.config.lags.size()) throw std::out_of_range("lag index out of range");
  if (sample.kernel != profile.kernel().name()) {
    throw Rejection("sample and profile were built for different kernels");
  }
  const auto& t = sample.config.lags[lag];
  const auto& o = profile.options();
  Lemma4Result r;
  r.rho_tilde_t = spectral::rho_tilde(profile.kernel(), profile.triplet(), t, o.search, o.quad).value;
  if (r.rho_tilde_t > rho_bar) {
    throw Rejection(fmt::format("lag is not in A_rho_bar: rho_tilde_t = {} > {}", r.rho_tilde_t, rho_bar));
  }
  const auto ti = certify::theorem_integral(profile, rho_bar);
  if (ti.divergent) throw Rejection("theorem integral diverges: " + ti.divergence);
  r.theorem_integral = ti.value;
  r.rhs = 2.0 / (std::numbers::pi * std::numbers::pi) * ti.value * ti.value * r.rho_tilde_t;
  r.lhs = lemma4_lhs(sample, lag, mu, &r.lhs_se);
  r.satisfied = r.lhs <= r.rhs + 3.0 * r.lhs_se;
  return r;
}

}  // namespace srd::simulate
