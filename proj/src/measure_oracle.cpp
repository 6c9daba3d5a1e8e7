#include "exlab/measure_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

ProductMeasure ProductMeasure::deterministic(double alpha, double value) {
  require(alpha > 0.0, "product measure: alpha must be positive");
  require(std::isfinite(value) && value >= 0.0, "product measure: Y must be finite and >= 0");
  ProductMeasure m;
  m.alpha_ = alpha;
  m.value_ = value;
  return m;
}

ProductMeasure ProductMeasure::empirical(double alpha, std::vector<double> sample) {
  require(alpha > 0.0, "product measure: alpha must be positive");
  require(!sample.empty(), "product measure: empirical Y sample is empty");
  for (double v : sample) require(std::isfinite(v) && v >= 0.0, "product measure: Y sample must be finite and >= 0");
  std::sort(sample.begin(), sample.end());
  ProductMeasure m;
  m.alpha_ = alpha;
  m.empirical_ = true;
  m.suffix_.assign(sample.size() + 1, 0.0);
  for (std::size_t i = sample.size(); i-- > 0;) m.suffix_[i] = m.suffix_[i + 1] + std::pow(sample[i], alpha);
  m.sorted_ = std::move(sample);
  return m;
}

double ProductMeasure::tail_moment(double u) const {
  if (!empirical_) return value_ > u ? std::pow(value_, alpha_) : 0.0;
  const auto idx = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin());
  return suffix_[idx] / static_cast<double>(sorted_.size());
}

double ProductMeasure::tail_probability(double u) const {
  if (!empirical_) return value_ > u ? 1.0 : 0.0;
  const auto idx = std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin();
  return static_cast<double>(static_cast<std::ptrdiff_t>(sorted_.size()) - idx) / static_cast<double>(sorted_.size());
}

double ProductMeasure::nu_box(double x, double y) const {
  require(y > 0.0, "nu_box: y must be positive");
  require(x > 0.0, "nu_box: x must be positive");
  if (std::isinf(x)) return std::pow(y, -alpha_) * tail_moment(0.0);
  const double u = y / x;
  const double v = std::pow(y, -alpha_) * tail_moment(u) - std::pow(x, -alpha_) * tail_probability(u);
  return std::max(v, 0.0);
}

double nu_alpha_mass(double alpha, const Interval& interval) {
  require(interval.lo > 0.0, "nu_alpha: interval must be bounded away from 0");
  if (interval.hi <= interval.lo) return 0.0;
  const double upper = std::isinf(interval.hi) ? 0.0 : std::pow(interval.hi, -alpha);
  return std::pow(interval.lo, -alpha) - upper;
}

Estimate mu_cylinder(double alpha, const TailDistribution& g, const std::vector<Interval>& cylinder,
                     std::size_t n_reps, Rng& rng, double level) {
  require(alpha > 0.0, "mu_cylinder: alpha must be positive");
  require(!cylinder.empty(), "mu_cylinder: empty cylinder");
  require(cylinder.front().lo > 0.0, "mu_cylinder: first interval touches 0");
  require(n_reps >= 1, "mu_cylinder: n_reps must be >= 1");
  const double mass = nu_alpha_mass(alpha, cylinder.front());
  if (mass == 0.0) return {0.0, 0.0, 0.0, 0.0, n_reps};
  const double top = std::isinf(cylinder.front().hi) ? 0.0 : std::pow(cylinder.front().hi, -alpha);
  const std::size_t m = cylinder.size() - 1;
  auto hits = map_ranges(n_reps, 1u << 14, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng local = rng.split(c);
    std::size_t k = 0;
    for (std::size_t r = b; r < e; ++r) {
      // x0 from nu_alpha normalized on (lo, hi]: inverse of x^{-alpha}.
      const double x0 = std::pow(top + local.uniform_open0() * mass, -1.0 / alpha);
      bool inside = true;
      double p = 1.0;
      for (std::size_t j = 1; j <= m && inside; ++j) {
        if (p != 0.0) p *= g.sample(local);
        inside = cylinder[j].contains(x0 * p);
      }
      if (inside) ++k;
    }
    return k;
  });
  std::size_t k = 0;
  for (auto h : hits) k += h;
  const Estimate w = wilson(k, n_reps, level);
  const double n = static_cast<double>(n_reps);
  const double p = static_cast<double>(k) / n;
  return {mass * p, mass * std::sqrt(p * (1.0 - p) / n), mass * w.lo, mass * w.hi, n_reps};
}

double truncation_error_bound(const TailMoment& sup_tail, double alpha, bool moment_certified, double s_max,
                              double q, double a, double delta) {
  if (!moment_certified) {
    throw InvalidArgument("truncation bound: E sup xi(j)^alpha is not certified finite");
  }
  require(s_max > 0.0 && q > 0.0 && a > 0.0 && delta > 0.0,
          "truncation bound: s_max, q, a and delta must be positive");
  return s_max / q * std::pow(a, -alpha) * sup_tail(a / delta);
}

double truncation_error_bound(const ProductMeasure& sup_law, bool moment_certified, double s_max, double q, double a,
                              double delta) {
  return truncation_error_bound([&](double u) { return sup_law.tail_moment(u); }, sup_law.alpha(),
                                moment_certified, s_max, q, a, delta);
}

DeltaChoice auto_delta(const TailMoment& sup_tail, double alpha, bool moment_certified, double s_max, double q,
                       double a, double target) {
  require(target > 0.0, "auto_delta: target must be positive");
  DeltaChoice d;
  d.delta = a;
  for (int k = 0; k < 200; ++k) {
    d.bound = truncation_error_bound(sup_tail, alpha, moment_certified, s_max, q, a, d.delta);
    if (d.bound < target) return d;
    d.delta /= 2.0;
  }
  throw EstimationError("auto_delta: truncation bound did not fall below target");
}

DeltaChoice auto_delta(const ProductMeasure& sup_law, bool moment_certified, double s_max, double q, double a,
                       double target) {
  return auto_delta([&](double u) { return sup_law.tail_moment(u); }, sup_law.alpha(), moment_certified, s_max, q,
                    a, target);
}

TailMoment certified_sup_tail(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                              std::size_t n_reps, const Rng& rng, double level) {
  return [=](double u) {
    Rng local = rng.split(std::bit_cast<std::uint64_t>(u));
    const Estimate e = sup_tail_moment(g, alpha, u, limits, n_reps, local, level);
    return e.hi;
  };
}

ProductMeasure sup_law(const TailDistribution& g, double alpha, const TailChainLimits& limits, std::size_t n,
                       Rng& rng) {
  if (g.is_deterministic()) {
    const double rho = g.param_value();
    require(rho < 1.0, "sup_law: deterministic tail chain with rho >= 1 has no finite supremum");
    return ProductMeasure::deterministic(alpha, rho);
  }
  return ProductMeasure::empirical(alpha, sample_sup(g, limits, n, rng));
}

}  // namespace exlab
