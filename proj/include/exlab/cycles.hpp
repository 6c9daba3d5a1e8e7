#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exlab/kernel.hpp"
#include "exlab/stats.hpp"
#include "exlab/tail_chain.hpp"

namespace exlab {

/// One regenerative cycle: states start .. start + tau_a, ending in the atom.
struct CycleRecord {
  std::size_t start = 0;
  std::size_t length = 0;  // tau_a + 1 states
  std::size_t tau_a = 0;   // steps spent outside A before the atom visit
  std::size_t tau_t = 0;   // first n with X_{start+n} <= downcrossing level
  double max_value = 0.0;     // max over the whole cycle
  double max_extremal = 0.0;  // max over indices < tau_t (0 when empty)
  double first_state = 0.0;
};

/// A path split at its atom visits. The initial cycle C_0 is kept for
/// reference only; estimators use `cycles` (C_1, C_2, ...).
struct CycleDecomposition {
  CycleRecord initial_cycle;
  std::vector<CycleRecord> cycles;
  std::vector<std::size_t> renewal_times;  // S_0, S_1, ...
  Estimate q_hat;                          // mean of S_k - S_{k-1}
  double threshold = 0.0;                  // downcrossing level t*y(t) in force
  std::size_t atom_visits = 0;             // over the whole path, including any partial tail
  std::size_t path_length = 0;

  std::size_t steps_covered() const { return renewal_times.empty() ? 0 : renewal_times.back(); }
};

/// Splits `path` at atom visits (path.atom_flags). The trailing partial cycle
/// is discarded. Throws EstimationError "no regeneration observed" when there
/// is no complete cycle after C_0, and InvalidArgument if `threshold` lies
/// below an atom state.
CycleDecomposition decompose(const ChainPath& path, double threshold, double level = 0.99);

/// States X_{S_{k-1}+j}, j < tau_k(t), for the downcrossing level `threshold`.
std::vector<double> extremal_component(const CycleRecord& cycle, const ChainPath& path, double threshold);

struct TailFitRow {
  double x = 0.0;
  std::size_t count = 0;
  double p_hat = 0.0;
  double scaled = 0.0;  // t * p_hat * x^alpha, estimates c at this x
  bool zero_count = false;
};

struct TailFit {
  double c_hat = 0.0;
  double c_se = 0.0;
  double alpha_hat = 0.0;
  double alpha_se = 0.0;
  std::vector<TailFitRow> rows;
};

struct TailFitAtT {
  double t = 0.0;
  double b_t = 0.0;
  TailFit full_cycle;
  TailFit extremal_component;
};

/// Fits t P_H[max_cycle / b(t) > x] ~ c x^{-alpha} over x_grid at each t.
/// c_hat is the weighted intercept of the log-log relation with the slope
/// fixed at -b.alpha(); alpha_hat is the unconstrained least-squares slope.
/// Standard errors come from the per-cycle influence functions. Requires at
/// least 1000 cycles.
std::vector<TailFitAtT> cycle_max_tail_fit(const CycleDecomposition& decomp, const ScalingFunction& b,
                                           const std::vector<double>& t_grid, const std::vector<double>& x_grid,
                                           std::size_t min_cycles = 1000, std::size_t min_exceedances = 5);

struct MaxLawRow {
  double x = 0.0;
  Estimate empirical;  // P[M_n <= b_n x]
  double limit = 0.0;  // exp(-c q^{-1} x^{-alpha})
};

struct MaxLawReport {
  std::vector<MaxLawRow> rows;
  double sup_distance = 0.0;
  double ci_half_width = 0.0;  // largest half-width among rows
  double b_n = 0.0;
};

/// Empirical law of M_n = max_{0<=j<=n} X_j (X_0 ~ H) against the limit
/// exp(-c q^{-1} x^{-alpha}).
MaxLawReport max_distribution_check(const KernelSpec& kernel, const ScalingFunction& b, std::size_t n,
                                    const std::vector<double>& x_grid, std::size_t n_reps,
                                    const LimitConstants& constants, Rng& rng, double level = 0.99);

/// q from the pooled cycles of `n_paths` independent paths of `n_steps`.
Estimate estimate_q(const KernelSpec& kernel, std::size_t n_steps, std::size_t n_paths, Rng& rng,
                    double level = 0.99);

}  // namespace exlab
