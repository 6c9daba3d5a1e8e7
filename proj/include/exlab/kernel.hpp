#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exlab/distribution.hpp"
#include "exlab/random.hpp"

namespace exlab {

/// The additive part phi(x, W) of the update function psi(x, (Z, W)) = Z x + phi(x, W).
struct Perturbation {
  enum class Kind {
    zero,            // phi = 0
    additive_noise,  // phi(x, W) = W, W independent of x
    bounded_custom,  // phi(x) = piecewise-linear table in x, clamped at the ends
    scaled_noise,    // phi(x, W) = W * x^power; violates phi(t, w)/t -> 0 when power >= 1
  };

  Kind kind = Kind::zero;
  std::optional<TailDistribution> noise;
  std::vector<std::pair<double, double>> table;  // (x, phi) knots sorted by x
  double power = 1.0;

  static Perturbation none() { return {}; }
  static Perturbation additive(TailDistribution w);
  static Perturbation custom(std::vector<std::pair<double, double>> knots);
  static Perturbation scaled(TailDistribution w, double power);

  double operator()(double x, Rng& rng) const;
  /// True when phi(t, w)/t -> 0, the form under which K stays in D(G).
  bool preserves_attraction() const;
};

/// Extremal boundary y(t). The effective boundary is always joined with
/// a_max/t so that t*y(t) >= sup A and the downcrossing never happens after
/// the return to the atom.
struct ExtremalBoundary {
  enum class Kind { atom, power_law, custom };

  Kind kind = Kind::atom;
  double coefficient = 1.0;  // power_law: y(t) = coefficient * t^{-exponent}
  double exponent = 1.0;
  std::function<double(double)> hook;  // custom

  static ExtremalBoundary atom() { return {}; }
  static ExtremalBoundary power_law(double coefficient, double exponent);
  static ExtremalBoundary custom(std::function<double(double)> y);
};

/// Transition kernel on [0, inf) with the explicit atom A = [0, atom_upper]:
/// from x <= atom_upper the next state is a draw from h_return, otherwise it
/// is Z*x + phi(x, W) with fresh (Z, W).
struct KernelSpec {
  std::string name = "custom";
  TailDistribution z_law = TailDistribution::point(0.5);
  Perturbation phi;
  double atom_upper = 1.0;
  TailDistribution h_return = TailDistribution::pareto(1.0);
  ExtremalBoundary boundary;

  void validate() const;
  bool in_atom(double x) const noexcept { return x <= atom_upper; }
};

double step(const KernelSpec& kernel, double x, Rng& rng);

/// y(t) joined with atom_upper/t.
double extremal_boundary_value(const KernelSpec& kernel, double t);

/// Level t*y(t) whose first downcrossing ends the extremal component.
double downcrossing_level(const KernelSpec& kernel, double t);

struct ChainPath {
  std::vector<double> states;
  std::vector<std::uint8_t> atom_flags;
  std::uint64_t seed = 0;
  std::string kernel_id;

  std::size_t size() const noexcept { return states.size(); }
};

struct InitialState {
  enum class Kind { from_h, fixed };
  Kind kind = Kind::from_h;
  double x0 = 0.0;

  static InitialState from_h() { return {}; }
  static InitialState fixed(double x) { return {Kind::fixed, x}; }
};

inline constexpr std::uint64_t kDefaultCycleCap = 10'000'000;

/// Path X_0..X_{n_steps}. Throws GuardTripped if the chain spends more than
/// `cycle_cap` consecutive steps outside the atom.
ChainPath simulate_path(const KernelSpec& kernel, InitialState init, std::uint64_t n_steps, Rng& rng,
                        std::uint64_t cycle_cap = kDefaultCycleCap);

struct AttractionPoint {
  double t = 0.0;
  double ks_distance = 0.0;
  double ci_half_width = 0.0;  // DKW band at the report level
};

struct AttractionReport {
  std::vector<AttractionPoint> points;
  double threshold = 0.0;
  bool consistent = false;
};

/// Kolmogorov-Smirnov distance between the law of step(kernel, t*u)/(t*u)
/// and G = law of Z, per t in t_grid. Consistent with D(G) when the
/// distance at the largest t falls below `threshold` (defaults to twice the
/// 99% DKW band) and does not increase beyond Monte Carlo noise along t.
AttractionReport check_domain_of_attraction(const KernelSpec& kernel, const std::vector<double>& t_grid, double u,
                                            std::size_t n_samples, Rng& rng,
                                            std::optional<double> threshold = std::nullopt);

/// KS distance between a sample and a (possibly atomic) law, sup over both
/// one-sided limits at every sample point.
double ks_distance_to(std::vector<double> sample, const TailDistribution& law);

/// Normalizer b(t) with t * P[X_0 > b(t) x] -> x^{-alpha}.
class ScalingFunction {
 public:
  enum class Mode { analytic_quantile, empirical_quantile };

  /// Analytic when H is pareto, otherwise an empirical (1 - 1/t)-quantile
  /// of `pilot_size` draws from H.
  static ScalingFunction for_law(const TailDistribution& h, double alpha, Rng& rng,
                                 std::size_t pilot_size = 1'000'000);
  static ScalingFunction analytic(const TailDistribution& h);
  static ScalingFunction empirical(std::vector<double> sample, double alpha);

  Mode mode() const noexcept { return mode_; }
  double alpha() const noexcept { return alpha_; }
  double operator()(double t) const;

 private:
  Mode mode_ = Mode::analytic_quantile;
  double alpha_ = 1.0;
  std::optional<TailDistribution> law_;
  std::vector<double> sorted_;
};

}  // namespace exlab
