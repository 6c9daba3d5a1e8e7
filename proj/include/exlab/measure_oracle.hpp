#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "exlab/distribution.hpp"
#include "exlab/random.hpp"
#include "exlab/stats.hpp"
#include "exlab/tail_chain.hpp"

namespace exlab {

/// nu(dx, dy) = nu_alpha(dx) P[x Y in dy] for a compounding variable Y given
/// as a point mass or as an empirical sample. The empirical form keeps the
/// sample sorted with suffix sums of Y^alpha, so tail-moment queries cost
/// O(log n).
class ProductMeasure {
 public:
  static ProductMeasure deterministic(double alpha, double value);
  static ProductMeasure empirical(double alpha, std::vector<double> sample);

  double alpha() const noexcept { return alpha_; }
  bool is_empirical() const noexcept { return empirical_; }
  std::size_t sample_size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_sample() const noexcept { return sorted_; }

  /// E[Y^alpha 1{Y > u}]
  double tail_moment(double u) const;
  /// P[Y > u]
  double tail_probability(double u) const;
  /// E Y^alpha
  double moment() const { return tail_moment(-1.0); }

  /// nu([0,x] x (y,inf]) = y^{-alpha} E[Y^alpha 1{Y > y/x}] - x^{-alpha} P[Y > y/x];
  /// x = +inf gives y^{-alpha} E Y^alpha. Requires y > 0.
  double nu_box(double x, double y) const;

 private:
  double alpha_ = 1.0;
  bool empirical_ = false;
  double value_ = 0.0;
  std::vector<double> sorted_;
  std::vector<double> suffix_;  // suffix_[i] = sum_{k >= i} sorted_[k]^alpha
};

/// (lo, hi] or [lo, hi] when lo_closed.
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;

  bool contains(double v) const { return (lo_closed ? v >= lo : v > lo) && v <= hi; }
  static Interval above(double lo) { return {lo, std::numeric_limits<double>::infinity(), false}; }
  static Interval everything() { return {0.0, std::numeric_limits<double>::infinity(), true}; }
};

/// mu(I_0 x I_1 x ... x I_m) = integral over I_0 of nu_alpha(dx_0) P[(x_0 xi(1), ..., x_0 xi(m)) in I_1 x ... x I_m],
/// by sampling x_0 from the normalized restriction of nu_alpha to I_0 and
/// reweighting by its mass. I_0 must be bounded away from 0.
Estimate mu_cylinder(double alpha, const TailDistribution& g, const std::vector<Interval>& cylinder,
                     std::size_t n_reps, Rng& rng, double level = 0.99);

/// nu_alpha(I) for an interval of (0, inf].
double nu_alpha_mass(double alpha, const Interval& interval);

/// (s_max/q) a^{-alpha} E[S^alpha 1{S > a/delta}] with S = sup_{j>=1} xi(j):
/// bounds the expected number of limit-process stacks in [0, s_max] reaching
/// above `a` from seeds i_k <= delta. Throws InvalidArgument when the moment
/// E S^alpha is not certified finite.
double truncation_error_bound(const ProductMeasure& sup_law, bool moment_certified, double s_max, double q, double a,
                              double delta);

/// u -> E[S^alpha 1{S > u}].
using TailMoment = std::function<double(double)>;

double truncation_error_bound(const TailMoment& sup_tail, double alpha, bool moment_certified, double s_max,
                              double q, double a, double delta);

struct DeltaChoice {
  double delta = 0.0;
  double bound = 0.0;
};

/// Largest delta = a / 2^k with truncation_error_bound < target.
DeltaChoice auto_delta(const ProductMeasure& sup_law, bool moment_certified, double s_max, double q, double a,
                       double target = 1e-3);

DeltaChoice auto_delta(const TailMoment& sup_tail, double alpha, bool moment_certified, double s_max, double q,
                       double a, double target = 1e-3);

/// Upper confidence limit of E[S^alpha 1{S > u}] from sup_tail_moment, with a
/// stream derived from `rng` and u alone, so repeated queries agree.
TailMoment certified_sup_tail(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                              std::size_t n_reps, const Rng& rng, double level = 0.99);

/// Law of S = sup_{j>=1} xi(j): exact for point masses, otherwise an
/// empirical sample of `n` tail-chain runs.
ProductMeasure sup_law(const TailDistribution& g, double alpha, const TailChainLimits& limits, std::size_t n,
                       Rng& rng);

}  // namespace exlab
