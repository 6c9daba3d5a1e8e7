#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exlab/kernel.hpp"
#include "exlab/measure_oracle.hpp"
#include "exlab/random.hpp"
#include "exlab/stats.hpp"

namespace exlab {

enum class ConditionId {
  drift_back,
  moment_uniform,
  within_cycle,
  within_cycle_mrv,
  drift_away_z,
  cycle_regularity,
  tau_tightness,
  regularity_kernel,
  joint_rv_full,
};

enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(ConditionId id);
std::string_view to_string(Verdict v);

/// One grid cell. Coordinates that do not apply to a condition are left at 0.
struct GridEstimate {
  double t = 0.0;
  double m = 0.0;
  double a = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  std::string label;         // u_t sequence, cylinder, or route
  Estimate estimate;         // probability, or t-scaled probability when t_scaled
  bool t_scaled = false;
  std::optional<Estimate> reference;  // limit value the estimate is compared with, if any
  std::size_t unresolved = 0;         // paths that hit the step cap away from the atom
};

struct ConditionReport {
  ConditionId id = ConditionId::drift_back;
  std::vector<GridEstimate> estimates;
  Verdict verdict = Verdict::inconclusive;
  std::string rationale;
};

/// One sequence u_t -> 0 used for small starts t u_t.
struct SmallStart {
  std::string name;
  std::function<double(double)> u;
};

/// u_t in {t^{-1/2}, 1/log t, y(t)} for the kernel's extremal boundary.
std::vector<SmallStart> default_small_starts(const KernelSpec& kernel);

struct DiagnosticOptions {
  double tolerance = 0.01;
  double level = 0.99;
  std::vector<double> t_grid{1e2, 1e3, 1e4};
  std::vector<std::size_t> m_grid{1, 2, 4, 8, 16, 32};
  double a = 1.0;
  double delta = 0.5;
  std::vector<double> delta_grid{0.5, 0.25, 0.125};
  std::size_t m0 = 1;
  /// m'_0 of the tau_A-horizon moment check; unset means m0.
  std::optional<std::size_t> m0_prime;
  std::vector<double> eta_grid{0.5, 0.25};
  /// Replicates per grid cell for conditional probabilities.
  std::size_t n_reps = 4000;
  /// t-scaled probabilities use reps_per_unit_t * t replicates, so a zero
  /// count certifies t P < tolerance at the 99% level.
  std::size_t reps_per_unit_t = 1000;
  /// Replicates are drawn in batches; a t-scaled cell stops early once its
  /// lower confidence bound exceeds the tolerance.
  std::size_t batch = 1u << 15;
  /// Steps after which a path that has not returned to the atom is counted
  /// as an exceedance.
  std::size_t step_cap = 10'000;
  /// joint_rv_full: cylinders of length joint_m + 1 over (X_0, ..., X_m)/b(t).
  std::size_t joint_m = 2;
  std::vector<std::vector<Interval>> cylinders;  // empty: defaults
  std::size_t joint_reps = 20'000;
};

/// lim_m limsup_t P[sup_{j>=m} X_j^{(b(t))}/b(t) > a | X_0 > delta b(t)] = 0.
ConditionReport check_drift_back(const KernelSpec& kernel, const ScalingFunction& b, const DiagnosticOptions& opts,
                                 Rng& rng);

enum class MomentHorizon { extremal_component, cycle };

/// lim_{delta->0} limsup_t t P[X_0/b(t) <= delta, sup_{j>=m0} X_j^{(b(t))}/b(t) > a] = 0.
/// MomentHorizon::cycle replaces the extremal-component horizon by tau_A.
ConditionReport check_moment_uniform(const KernelSpec& kernel, const ScalingFunction& b,
                                     const DiagnosticOptions& opts, Rng& rng,
                                     MomentHorizon horizon = MomentHorizon::extremal_component);

struct WithinCycleReports {
  ConditionReport conditional;  // given X_0 > delta b(t)
  ConditionReport t_scaled;     // t P[...]
};

/// Exceedances of a b(t) strictly between the downcrossing tau(b(t)) and the atom visit.
WithinCycleReports check_within_cycle(const KernelSpec& kernel, const ScalingFunction& b,
                                      const DiagnosticOptions& opts, Rng& rng);

/// P_t[sup_{m<=j<tau_A} X_j > t a], for G({0}) = 0.
ConditionReport check_drift_away_z(const KernelSpec& kernel, const DiagnosticOptions& opts, Rng& rng);

/// P_{t u_t}[tau_A > m].
ConditionReport check_tau_tightness(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                    const DiagnosticOptions& opts, Rng& rng);

/// P_{t u_t}[sup_{1<=j<tau_A} X_j > t a] for each u_t, together with the
/// tau_A tightness route; passes when either route passes. For G({0}) > 0.
ConditionReport check_cycle_regularity(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                       const DiagnosticOptions& opts, Rng& rng);

/// P[step(t u_t)/t > eta] -> 0 for every u_t and eta.
ConditionReport check_regularity_kernel(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                        const DiagnosticOptions& opts, Rng& rng);

/// t P_H[(X_0, ..., X_m)/b(t) in C] against mu(C), and against the marginal
/// form x^{-alpha} (E xi_1^alpha)^j when C constrains only X_0 > lo and
/// X_j > x with lo (sup G)^j <= x.
ConditionReport check_joint_rv_full(const KernelSpec& kernel, const ScalingFunction& b,
                                    const DiagnosticOptions& opts, Rng& rng);

std::vector<std::vector<Interval>> default_cylinders(std::size_t m);

/// Every applicable checker: drift_away_z only when G({0}) = 0, cycle
/// regularity and tau tightness only when G({0}) > 0.
std::vector<ConditionReport> run_diagnostics(const KernelSpec& kernel, const ScalingFunction& b,
                                             const DiagnosticOptions& opts, Rng& rng);

}  // namespace exlab
