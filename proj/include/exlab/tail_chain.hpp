#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exlab/distribution.hpp"
#include "exlab/random.hpp"
#include "exlab/stats.hpp"

namespace exlab {

/// One run of the multiplicative random walk xi(n) = xi_1 ... xi_n and the
/// tail chain T_n = T0 * xi(n).
struct TailChainPath {
  std::vector<double> xi;        // xi_1 .. xi_J
  std::vector<double> products;  // products[n-1] = xi(n)
  double t0 = 1.0;
  std::optional<std::size_t> death_time;  // first n with xi(n) = 0; nullopt is the +inf sentinel
  bool truncated = false;                 // stopped by the horizon rather than death or the kill level

  /// xi(n), with xi(0) = 1.
  double product(std::size_t n) const;
  /// T_n = T0 * xi(n).
  double value(std::size_t n) const { return t0 * product(n); }
};

/// Stopping rule for tail-chain simulation. A run stops at death, once
/// xi(n) < kill_epsilon with n >= min_steps, or at `horizon` (truncated).
struct TailChainLimits {
  std::size_t horizon = 100'000;
  double kill_epsilon = 1e-12;
  std::size_t min_steps = 64;
};

TailChainPath simulate_tail_chain(const TailDistribution& g, double t0, std::size_t horizon, double kill_epsilon,
                                  Rng& rng, std::size_t min_steps = 0);

enum class Transience { transient_by_atom, transient_by_drift, not_transient, inconclusive };

std::string_view to_string(Transience t);

struct TransienceReport {
  Transience verdict = Transience::inconclusive;
  Estimate mean_log;  // E log xi_1 (exact when the family has a closed form)
  bool analytic = false;
};

TransienceReport check_transience(const TailDistribution& g, double alpha, std::size_t n_probe, Rng& rng,
                                  double level = 0.99);

inline bool is_transient(Transience t) {
  return t == Transience::transient_by_atom || t == Transience::transient_by_drift;
}

/// Sufficient check for E sup_{j>=1} xi(j)^alpha < inf: either xi <= 1 a.s.
/// or E xi^alpha < 1 (then E sup xi(j)^alpha <= sum_j (E xi^alpha)^j).
bool sup_moment_certified(const TailDistribution& g, double alpha);

/// kappa > 0 with E xi^kappa = 1, when it exists (E log xi < 0 and xi > 1
/// with positive probability).
std::optional<double> cramer_exponent(const TailDistribution& g);

/// E[S^alpha 1{S > u}] for S = sup_{j>=1} xi(j). For u > 1 and a law with a
/// Cramer exponent kappa and a size-biased form, the walk runs under the
/// size-biased law until it first exceeds u (likelihood ratio xi(T)^{-kappa})
/// and under G afterwards; otherwise plain Monte Carlo.
Estimate sup_tail_moment(const TailDistribution& g, double alpha, double u, const TailChainLimits& limits,
                         std::size_t n_reps, Rng& rng, double level = 0.99);

/// Monte Carlo functionals of S = sup_{j>=1} xi(j).
struct SupStatistics {
  Estimate p_sup_le_1;            // P[S <= 1]
  Estimate e_sup_alpha;           // E S^alpha
  Estimate e_sup_alpha_above_1;   // E S^alpha 1{S > 1}
  Estimate c;                     // P[S <= 1] + E S^alpha 1{S > 1}
  Estimate theta;                 // c - E S^alpha = E 1{S <= 1}(1 - S^alpha)
  std::size_t n_reps = 0;
  std::size_t truncated_paths = 0;
  bool normal_ci = true;          // false: percentile-bootstrap intervals
  double horizon_doubling_delta = 0.0;  // |E S^alpha(2H) - E S^alpha(H)| on common random numbers
  bool horizon_doubling_agrees = true;
};

/// Refuses (EstimationError "transience check failed") unless the tail chain
/// is transient, since the supremum may otherwise be infinite.
SupStatistics sup_statistics(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                             std::size_t n_reps, Rng& rng, double level = 0.99);

/// Draws of S = sup_{j>=1} xi(j).
std::vector<double> sample_sup(const TailDistribution& g, const TailChainLimits& limits, std::size_t n, Rng& rng);

/// Estimates of P[sup_{j>=m} xi(j) > a] for each m in m_grid.
std::vector<Estimate> tail_sup_exceedance(const TailDistribution& g, const std::vector<std::size_t>& m_grid,
                                          double a, const TailChainLimits& limits, std::size_t n_reps, Rng& rng,
                                          double level = 0.99);

struct Provenance {
  enum class Kind { analytic, monte_carlo };
  Kind kind = Kind::analytic;
  std::size_t n_reps = 0;
  double level = 0.99;
};

/// (alpha, q, E xi^alpha, E sup xi(j)^alpha, P[sup <= 1], c, theta) with intervals.
struct LimitConstants {
  double alpha = 1.0;
  std::optional<Estimate> q;
  Estimate e_xi_alpha;
  Estimate e_sup_alpha;
  Estimate e_sup_alpha_above_1;
  Estimate p_sup_le_1;
  Estimate c;
  std::optional<Estimate> theta_stationary;
  std::optional<Estimate> theta_regenerative;
  Provenance provenance;
};

/// c assembled from sup_statistics; closed form when G is a point mass.
LimitConstants constant_c(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                          std::size_t n_reps, Rng& rng, double level = 0.99);

struct ExtremalIndex {
  Estimate theta_stationary;
  Estimate theta_regenerative;
};

/// theta = c - E sup xi(j)^alpha and theta = E sup xi(j)^alpha / (q - 1).
/// Throws InvalidArgument when q is missing or q <= 1.
ExtremalIndex extremal_index(const LimitConstants& constants);

/// extremal_index() written back into the constants.
void fill_extremal_index(LimitConstants& constants);

}  // namespace exlab
