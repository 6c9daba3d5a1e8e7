#include "exlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

Perturbation Perturbation::additive(TailDistribution w) {
  Perturbation p;
  p.kind = Kind::additive_noise;
  p.noise = std::move(w);
  return p;
}

Perturbation Perturbation::custom(std::vector<std::pair<double, double>> knots) {
  require(!knots.empty(), "bounded_custom: table must not be empty");
  std::sort(knots.begin(), knots.end());
  for (const auto& [x, v] : knots) {
    require(std::isfinite(x) && std::isfinite(v), "bounded_custom: knots must be finite");
  }
  Perturbation p;
  p.kind = Kind::bounded_custom;
  p.table = std::move(knots);
  return p;
}

Perturbation Perturbation::scaled(TailDistribution w, double power) {
  require(std::isfinite(power) && power >= 0.0, "scaled_noise: power must be >= 0");
  Perturbation p;
  p.kind = Kind::scaled_noise;
  p.noise = std::move(w);
  p.power = power;
  return p;
}

double Perturbation::operator()(double x, Rng& rng) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::additive_noise: return noise->sample(rng);
    case Kind::scaled_noise: return noise->sample(rng) * std::pow(x, power);
    case Kind::bounded_custom: {
      if (x <= table.front().first) return table.front().second;
      if (x >= table.back().first) return table.back().second;
      const auto hi = std::upper_bound(table.begin(), table.end(), x,
                                       [](double v, const auto& knot) { return v < knot.first; });
      const auto lo = hi - 1;
      const double w = (x - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

bool Perturbation::preserves_attraction() const {
  return kind != Kind::scaled_noise || power < 1.0;
}

ExtremalBoundary ExtremalBoundary::power_law(double coefficient, double exponent) {
  require(coefficient > 0.0 && exponent > 0.0, "power_law boundary: coefficient and exponent must be positive");
  ExtremalBoundary b;
  b.kind = Kind::power_law;
  b.coefficient = coefficient;
  b.exponent = exponent;
  return b;
}

ExtremalBoundary ExtremalBoundary::custom(std::function<double(double)> y) {
  require(static_cast<bool>(y), "custom boundary: empty function");
  ExtremalBoundary b;
  b.kind = Kind::custom;
  b.hook = std::move(y);
  return b;
}

void KernelSpec::validate() const {
  require(std::isfinite(atom_upper) && atom_upper > 0.0, "kernel: atom_upper must be positive and finite");
  if (phi.kind == Perturbation::Kind::additive_noise || phi.kind == Perturbation::Kind::scaled_noise) {
    require(phi.noise.has_value(), "kernel: noise perturbation without a W law");
  }
  if (phi.kind == Perturbation::Kind::bounded_custom) {
    require(!phi.table.empty(), "kernel: bounded_custom perturbation without a table");
    for (const auto& [x, v] : phi.table) require(v >= 0.0, "kernel: bounded_custom values must be >= 0");
  }
  if (boundary.kind == ExtremalBoundary::Kind::custom) {
    require(static_cast<bool>(boundary.hook), "kernel: custom boundary without a function");
  }
}

double step(const KernelSpec& kernel, double x, Rng& rng) {
  if (kernel.in_atom(x)) return kernel.h_return.sample(rng);
  const double z = kernel.z_law.sample(rng);
  const double next = z * x + kernel.phi(x, rng);
  return std::max(next, 0.0);
}

double extremal_boundary_value(const KernelSpec& kernel, double t) {
  require(t > 0.0, "extremal boundary: t must be positive");
  double y = kernel.atom_upper / t;
  switch (kernel.boundary.kind) {
    case ExtremalBoundary::Kind::atom: break;
    case ExtremalBoundary::Kind::power_law:
      y = std::max(y, kernel.boundary.coefficient * std::pow(t, -kernel.boundary.exponent));
      break;
    case ExtremalBoundary::Kind::custom: y = std::max(y, kernel.boundary.hook(t)); break;
  }
  return y;
}

double downcrossing_level(const KernelSpec& kernel, double t) {
  if (kernel.boundary.kind == ExtremalBoundary::Kind::atom) return kernel.atom_upper;
  return t * extremal_boundary_value(kernel, t);
}

ChainPath simulate_path(const KernelSpec& kernel, InitialState init, std::uint64_t n_steps, Rng& rng,
                        std::uint64_t cycle_cap) {
  kernel.validate();
  ChainPath path;
  path.seed = rng.seed();
  path.kernel_id = kernel.name;
  path.states.resize(n_steps + 1);
  path.atom_flags.resize(n_steps + 1);
  double x = init.kind == InitialState::Kind::fixed ? init.x0 : kernel.h_return.sample(rng);
  require(x >= 0.0, "simulate_path: initial state must be >= 0");
  std::uint64_t outside = 0;
  for (std::uint64_t j = 0;; ++j) {
    path.states[j] = x;
    const bool in_a = kernel.in_atom(x);
    path.atom_flags[j] = in_a ? 1 : 0;
    outside = in_a ? 0 : outside + 1;
    if (outside > cycle_cap) {
      throw GuardTripped("cycle exceeded " + std::to_string(cycle_cap) +
                         " steps without returning to the atom (positive recurrence guard)");
    }
    if (j == n_steps) break;
    x = step(kernel, x, rng);
  }
  return path;
}

namespace {

std::vector<double> atoms_of(const TailDistribution& law) {
  switch (law.family()) {
    case Family::deterministic_point: return {law.param_value()};
    case Family::user_table: return law.table_values();
    case Family::mixture_with_point_mass_at_zero: {
      auto a = atoms_of(law.base());
      a.push_back(0.0);
      return a;
    }
    default: return {};
  }
}

}  // namespace

double ks_distance_to(std::vector<double> sample, const TailDistribution& law) {
  require(!sample.empty(), "ks_distance: empty sample");
  const std::vector<double> atoms = atoms_of(law);
  // Ratios such as (0.7 x)/x can land one ulp off an atom; snap them back.
  for (double& v : sample) {
    for (double a : atoms) {
      if (std::abs(v - a) <= 1e-9 * std::max(1.0, std::abs(a))) v = a;
    }
  }
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  auto probe = [&](double x) {
    const double below = static_cast<double>(std::lower_bound(sample.begin(), sample.end(), x) - sample.begin());
    const double upto = static_cast<double>(std::upper_bound(sample.begin(), sample.end(), x) - sample.begin());
    d = std::max(d, std::abs(upto / n - law.cdf(x)));
    d = std::max(d, std::abs(below / n - law.cdf_below(x)));
  };
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (i > 0 && sample[i] == sample[i - 1]) continue;
    probe(sample[i]);
  }
  for (double a : atoms) probe(a);
  return d;
}

AttractionReport check_domain_of_attraction(const KernelSpec& kernel, const std::vector<double>& t_grid, double u,
                                            std::size_t n_samples, Rng& rng, std::optional<double> threshold) {
  kernel.validate();
  require(!t_grid.empty(), "check_domain_of_attraction: empty t_grid");
  require(u > 0.0, "check_domain_of_attraction: u must be positive");
  require(n_samples >= 10, "check_domain_of_attraction: need at least 10 samples");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    require(t_grid[i] > t_grid[i - 1], "check_domain_of_attraction: t_grid must be increasing");
  }
  const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n_samples)));
  AttractionReport report;
  report.threshold = threshold.value_or(2.0 * band);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double x = t_grid[k] * u;
    const Rng base = rng.split(k);
    constexpr std::size_t kChunk = 1u << 14;
    auto chunks = map_ranges(n_samples, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
      Rng local = base.split(c);
      std::vector<double> out;
      out.reserve(e - b);
      for (std::size_t i = b; i < e; ++i) out.push_back(step(kernel, x, local) / x);
      return out;
    });
    std::vector<double> ratios;
    ratios.reserve(n_samples);
    for (auto& c : chunks) ratios.insert(ratios.end(), c.begin(), c.end());
    for (double r : ratios) {
      if (!std::isfinite(r)) throw EstimationError("check_domain_of_attraction: mass escaping to infinity");
    }
    report.points.push_back({t_grid[k], ks_distance_to(std::move(ratios), kernel.z_law), band});
  }
  bool nonincreasing = true;
  for (std::size_t k = 1; k < report.points.size(); ++k) {
    if (report.points[k].ks_distance > report.points[k - 1].ks_distance + 2.0 * band) nonincreasing = false;
  }
  report.consistent = nonincreasing && report.points.back().ks_distance <= report.threshold;
  return report;
}

ScalingFunction ScalingFunction::for_law(const TailDistribution& h, double alpha, Rng& rng,
                                         std::size_t pilot_size) {
  if (h.family() == Family::pareto) return analytic(h);
  require(pilot_size >= 100, "scaling function: pilot sample too small");
  std::vector<double> sample(pilot_size);
  for (double& v : sample) v = h.sample(rng);
  return empirical(std::move(sample), alpha);
}

ScalingFunction ScalingFunction::analytic(const TailDistribution& h) {
  require(h.family() == Family::pareto, "analytic scaling function requires a pareto law");
  ScalingFunction b;
  b.mode_ = Mode::analytic_quantile;
  b.alpha_ = *h.alpha();
  b.law_ = h;
  return b;
}

ScalingFunction ScalingFunction::empirical(std::vector<double> sample, double alpha) {
  require(sample.size() >= 100, "scaling function: pilot sample too small");
  require(alpha > 0.0, "scaling function: alpha must be positive");
  ScalingFunction b;
  b.mode_ = Mode::empirical_quantile;
  b.alpha_ = alpha;
  std::sort(sample.begin(), sample.end());
  b.sorted_ = std::move(sample);
  return b;
}

double ScalingFunction::operator()(double t) const {
  require(t >= 1.0, "scaling function: t must be >= 1");
  if (mode_ == Mode::analytic_quantile) return law_->upper_quantile(t);
  // Beyond the pilot's resolution, extrapolate from the 10th largest draw
  // with the regularly varying tail.
  constexpr double kTop = 10.0;
  const double n = static_cast<double>(sorted_.size());
  const double above = n / t;
  if (above < kTop) {
    const double anchor = sorted_[sorted_.size() - static_cast<std::size_t>(kTop)];
    return anchor * std::pow(kTop * t / n, 1.0 / alpha_);
  }
  const auto k = static_cast<std::size_t>(std::ceil(above));
  return sorted_[sorted_.size() - k];
}

}  // namespace exlab
