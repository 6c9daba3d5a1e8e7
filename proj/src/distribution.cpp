#include "exlab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "exlab/error.hpp"

namespace exlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double standard_normal_quantile(double p) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, p);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::pareto: return "pareto";
    case Family::deterministic_point: return "deterministic_point";
    case Family::lognormal: return "lognormal";
    case Family::mixture_with_point_mass_at_zero: return "mixture_with_point_mass_at_zero";
    case Family::user_table: return "user_table";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::pareto, Family::deterministic_point, Family::lognormal,
                   Family::mixture_with_point_mass_at_zero, Family::user_table}) {
    if (to_string(f) == name) return f;
  }
  throw InvalidArgument("unknown distribution family '" + std::string(name) + "'");
}

TailDistribution TailDistribution::pareto(double alpha, double scale) {
  require(std::isfinite(alpha) && alpha > 0.0, "pareto: alpha must be positive and finite");
  require(std::isfinite(scale) && scale > 0.0, "pareto: scale must be positive and finite");
  TailDistribution d;
  d.family_ = Family::pareto;
  d.a_ = alpha;
  d.b_ = scale;
  return d;
}

TailDistribution TailDistribution::point(double value) {
  require(std::isfinite(value) && value >= 0.0, "deterministic_point: value must be finite and >= 0");
  TailDistribution d;
  d.family_ = Family::deterministic_point;
  d.a_ = value;
  return d;
}

TailDistribution TailDistribution::lognormal(double mu, double sigma) {
  require(std::isfinite(mu), "lognormal: mu must be finite");
  require(std::isfinite(sigma) && sigma > 0.0, "lognormal: sigma must be positive");
  TailDistribution d;
  d.family_ = Family::lognormal;
  d.a_ = mu;
  d.b_ = sigma;
  return d;
}

TailDistribution TailDistribution::mixture(double p0, const TailDistribution& base) {
  require(p0 >= 0.0 && p0 <= 1.0, "mixture: p0 must lie in [0,1]");
  TailDistribution d;
  d.family_ = Family::mixture_with_point_mass_at_zero;
  d.a_ = p0;
  d.base_ = std::make_shared<const TailDistribution>(base);
  return d;
}

TailDistribution TailDistribution::table(std::vector<double> values, std::vector<double> weights) {
  require(!values.empty() && values.size() == weights.size(), "user_table: values/weights size mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]) && values[i] >= 0.0, "user_table: values must be finite and >= 0");
    require(std::isfinite(weights[i]) && weights[i] >= 0.0, "user_table: weights must be >= 0");
    total += weights[i];
  }
  require(total > 0.0, "user_table: weights sum to zero");
  TailDistribution d;
  d.family_ = Family::user_table;
  double run = 0.0;
  for (std::size_t i : order) {
    d.values_.push_back(values[i]);
    d.weights_.push_back(weights[i] / total);
    run += weights[i] / total;
    d.cumulative_.push_back(run);
  }
  d.cumulative_.back() = 1.0;
  return d;
}

std::optional<double> TailDistribution::alpha() const {
  switch (family_) {
    case Family::pareto: return a_;
    case Family::mixture_with_point_mass_at_zero: return base_->alpha();
    default: return std::nullopt;
  }
}

double TailDistribution::point_mass_at_zero() const {
  switch (family_) {
    case Family::deterministic_point: return a_ == 0.0 ? 1.0 : 0.0;
    case Family::mixture_with_point_mass_at_zero: return a_ + (1.0 - a_) * base_->point_mass_at_zero();
    case Family::user_table: {
      double m = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] == 0.0) m += weights_[i];
      return m;
    }
    default: return 0.0;
  }
}

double TailDistribution::sample(Rng& rng) const {
  switch (family_) {
    case Family::deterministic_point: return a_;
    case Family::pareto: return b_ * std::pow(rng.uniform_open0(), -1.0 / a_);
    case Family::lognormal: return std::exp(a_ + b_ * rng.normal());
    case Family::mixture_with_point_mass_at_zero: return rng.uniform() < a_ ? 0.0 : base_->sample(rng);
    case Family::user_table: return quantile(rng.uniform());
  }
  return 0.0;
}

double TailDistribution::quantile(double p) const {
  require(p >= 0.0 && p < 1.0, "quantile: p must lie in [0,1)");
  switch (family_) {
    case Family::deterministic_point: return a_;
    case Family::pareto: return b_ * std::pow(1.0 - p, -1.0 / a_);
    case Family::lognormal: return p == 0.0 ? 0.0 : std::exp(a_ + b_ * standard_normal_quantile(p));
    case Family::mixture_with_point_mass_at_zero:
      if (p < a_ || a_ >= 1.0) return 0.0;
      return base_->quantile(std::min((p - a_) / (1.0 - a_), std::nextafter(1.0, 0.0)));
    case Family::user_table: {
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
      return values_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(
          it - cumulative_.begin(), static_cast<std::ptrdiff_t>(values_.size()) - 1))];
    }
  }
  return 0.0;
}

double TailDistribution::upper_quantile(double t) const {
  require(t >= 1.0, "upper_quantile: t must be >= 1");
  switch (family_) {
    case Family::pareto: return b_ * std::pow(t, 1.0 / a_);
    case Family::lognormal: return std::exp(a_ - b_ * standard_normal_quantile(1.0 / t));
    default: return quantile(1.0 - 1.0 / t);
  }
}

double TailDistribution::cdf(double x) const {
  if (x < 0.0) return 0.0;
  switch (family_) {
    case Family::deterministic_point: return x >= a_ ? 1.0 : 0.0;
    case Family::pareto: return x <= b_ ? 0.0 : 1.0 - std::pow(x / b_, -a_);
    case Family::lognormal: return x == 0.0 ? 0.0 : standard_normal_cdf((std::log(x) - a_) / b_);
    case Family::mixture_with_point_mass_at_zero: return a_ + (1.0 - a_) * base_->cdf(x);
    case Family::user_table: {
      const auto it = std::upper_bound(values_.begin(), values_.end(), x);
      const auto k = it - values_.begin();
      return k == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(k - 1)];
    }
  }
  return 0.0;
}

double TailDistribution::survival(double x) const {
  if (family_ == Family::pareto) return x <= b_ ? 1.0 : std::pow(x / b_, -a_);
  return 1.0 - cdf(x);
}

double TailDistribution::cdf_below(double x) const {
  if (x <= 0.0) return 0.0;
  switch (family_) {
    case Family::deterministic_point: return x > a_ ? 1.0 : 0.0;
    case Family::mixture_with_point_mass_at_zero: return a_ + (1.0 - a_) * base_->cdf_below(x);
    case Family::user_table: {
      const auto it = std::lower_bound(values_.begin(), values_.end(), x);
      const auto k = it - values_.begin();
      return k == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(k - 1)];
    }
    default: return cdf(x);  // continuous
  }
}

double TailDistribution::sample_above(double threshold, Rng& rng) const {
  switch (family_) {
    case Family::pareto: {
      const double lo = std::max(threshold, b_);
      return lo * std::pow(rng.uniform_open0(), -1.0 / a_);
    }
    case Family::deterministic_point:
      require(a_ > threshold, "sample_above: point mass lies at or below the threshold");
      return a_;
    case Family::mixture_with_point_mass_at_zero:
      if (threshold < 0.0) return sample(rng);
      return base_->sample_above(threshold, rng);
    default: {
      const double f = cdf(threshold);
      require(f < 1.0, "sample_above: no mass above the threshold");
      double p = f + (1.0 - f) * rng.uniform_open0();
      p = std::min(p, std::nextafter(1.0, 0.0));
      // Guard against rounding placing the draw on the threshold.
      return std::max(quantile(p), std::nextafter(threshold, kInf));
    }
  }
}

double TailDistribution::mean_log() const {
  switch (family_) {
    case Family::deterministic_point: return a_ == 0.0 ? -kInf : std::log(a_);
    case Family::pareto: return std::log(b_) + 1.0 / a_;
    case Family::lognormal: return a_;
    case Family::mixture_with_point_mass_at_zero: return a_ > 0.0 ? -kInf : base_->mean_log();
    case Family::user_table: {
      double m = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        if (values_[i] == 0.0) return -kInf;
        m += weights_[i] * std::log(values_[i]);
      }
      return m;
    }
  }
  return 0.0;
}

double TailDistribution::moment(double p) const {
  require(p > 0.0, "moment: order must be positive");
  switch (family_) {
    case Family::deterministic_point: return std::pow(a_, p);
    case Family::pareto: return p < a_ ? std::pow(b_, p) * a_ / (a_ - p) : kInf;
    case Family::lognormal: return std::exp(p * a_ + 0.5 * p * p * b_ * b_);
    case Family::mixture_with_point_mass_at_zero: return (1.0 - a_) * base_->moment(p);
    case Family::user_table: {
      double m = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) m += weights_[i] * std::pow(values_[i], p);
      return m;
    }
  }
  return 0.0;
}

double TailDistribution::upper_bound() const {
  switch (family_) {
    case Family::deterministic_point: return a_;
    case Family::mixture_with_point_mass_at_zero: return a_ >= 1.0 ? 0.0 : base_->upper_bound();
    case Family::user_table: {
      for (std::size_t i = values_.size(); i-- > 0;)
        if (weights_[i] > 0.0) return values_[i];
      return 0.0;
    }
    default: return kInf;
  }
}

std::optional<TailDistribution> TailDistribution::size_biased(double kappa) const {
  require(kappa > 0.0, "size_biased: kappa must be positive");
  switch (family_) {
    case Family::deterministic_point:
      if (a_ == 0.0) return std::nullopt;
      return *this;
    case Family::pareto:
      if (kappa >= a_) return std::nullopt;
      return pareto(a_ - kappa, b_);
    case Family::lognormal: return lognormal(a_ + kappa * b_ * b_, b_);
    case Family::mixture_with_point_mass_at_zero:
      if (a_ >= 1.0) return std::nullopt;
      return base_->size_biased(kappa);
    case Family::user_table: {
      std::vector<double> w(values_.size());
      double total = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) total += w[i] = weights_[i] * std::pow(values_[i], kappa);
      if (!(total > 0.0) || !std::isfinite(total)) return std::nullopt;
      return table(values_, std::move(w));
    }
  }
  return std::nullopt;
}

std::string TailDistribution::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::deterministic_point: os << "point(" << a_ << ")"; break;
    case Family::pareto: os << "pareto(alpha=" << a_ << ", scale=" << b_ << ")"; break;
    case Family::lognormal: os << "lognormal(mu=" << a_ << ", sigma=" << b_ << ")"; break;
    case Family::mixture_with_point_mass_at_zero: os << "mixture(p0=" << a_ << ", " << base_->describe() << ")"; break;
    case Family::user_table: os << "table(" << values_.size() << " atoms)"; break;
  }
  return os.str();
}

}  // namespace exlab
