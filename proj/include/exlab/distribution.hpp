#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exlab/random.hpp"

namespace exlab {

enum class Family { pareto, deterministic_point, lognormal, mixture_with_point_mass_at_zero, user_table };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// A law on [0, inf). Immutable value type; copies share the mixture base.
///
/// Families and parameters:
///   pareto(alpha, scale)          P[X > x] = (x/scale)^{-alpha}, x >= scale
///   deterministic_point(value)    point mass at value
///   lognormal(mu, sigma)          log X ~ N(mu, sigma^2)
///   mixture(p0, base)             0 with probability p0, otherwise base
///   user_table(values, weights)   discrete law on the listed values
class TailDistribution {
 public:
  static TailDistribution pareto(double alpha, double scale = 1.0);
  static TailDistribution point(double value);
  static TailDistribution lognormal(double mu, double sigma);
  static TailDistribution mixture(double p0, const TailDistribution& base);
  static TailDistribution table(std::vector<double> values, std::vector<double> weights);

  Family family() const noexcept { return family_; }

  /// Tail index for regularly varying families (pareto and mixtures of it).
  std::optional<double> alpha() const;
  double point_mass_at_zero() const;

  double sample(Rng& rng) const;
  /// Generalized inverse CDF, inf{x : F(x) >= p}, for p in [0, 1).
  double quantile(double p) const;
  /// The x with P[X > x] = 1/t for t >= 1, computed without forming 1 - 1/t
  /// when the family has a closed form (pareto: scale * t^{1/alpha}).
  double upper_quantile(double t) const;
  /// P[X <= x].
  double cdf(double x) const;
  /// P[X < x].
  double cdf_below(double x) const;
  /// P[X > x]; exact in the far tail for pareto.
  double survival(double x) const;
  /// A draw from the law conditioned on X > threshold, by inverse-CDF
  /// restriction. Throws InvalidArgument if P[X > threshold] = 0.
  double sample_above(double threshold, Rng& rng) const;

  /// E log X; -inf when the law has an atom at 0.
  double mean_log() const;
  /// E X^p for p > 0; +inf when the moment diverges.
  double moment(double p) const;
  /// Essential supremum (+inf for unbounded families).
  double upper_bound() const;
  /// The size-biased law x^kappa G(dx) / E X^kappa, when it stays in a
  /// supported family and the moment is finite.
  std::optional<TailDistribution> size_biased(double kappa) const;

  bool is_deterministic() const noexcept { return family_ == Family::deterministic_point; }

  // Raw parameters, for serialization and inspection.
  double param_alpha() const noexcept { return a_; }
  double param_scale() const noexcept { return b_; }
  double param_value() const noexcept { return a_; }
  double param_mu() const noexcept { return a_; }
  double param_sigma() const noexcept { return b_; }
  double param_p0() const noexcept { return a_; }
  const TailDistribution& base() const { return *base_; }
  const std::vector<double>& table_values() const noexcept { return values_; }
  const std::vector<double>& table_weights() const noexcept { return weights_; }

  std::string describe() const;

 private:
  TailDistribution() = default;

  Family family_ = Family::deterministic_point;
  double a_ = 0.0;
  double b_ = 0.0;
  std::shared_ptr<const TailDistribution> base_;
  std::vector<double> values_;   // sorted
  std::vector<double> weights_;  // normalized, aligned with values_
  std::vector<double> cumulative_;
};

}  // namespace exlab
