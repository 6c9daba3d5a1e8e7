#include "exlab/tail_chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::uint64_t kBootstrapStream = 0xB007'5742'0000'0001ULL;

/// S = sup_{j>=1} xi(j) along one run, without storing the path.
struct SupRun {
  double sup = 0.0;
  bool truncated = false;
};

SupRun run_sup(const TailDistribution& g, const TailChainLimits& limits, Rng& rng) {
  SupRun r;
  double p = 1.0;
  for (std::size_t n = 1; n <= limits.horizon; ++n) {
    p *= g.sample(rng);
    r.sup = std::max(r.sup, p);
    if (p == 0.0) return r;
    if (p < limits.kill_epsilon && n >= limits.min_steps) return r;
  }
  r.truncated = true;
  return r;
}

enum Stat : std::size_t { kLe1, kSupA, kSupAAbove, kC, kTheta, kStatCount };

std::array<double, kStatCount> path_stats(double sup, double alpha) {
  const double sa = std::pow(sup, alpha);
  const bool le1 = sup <= 1.0;
  return {le1 ? 1.0 : 0.0, sa, le1 ? 0.0 : sa, le1 ? 1.0 : sa, le1 ? 1.0 - sa : 0.0};
}

Estimate percentile_bootstrap(const std::vector<double>& values, double level, Rng rng, std::size_t resamples = 200) {
  RunningStats full;
  for (double v : values) full.add(v);
  std::vector<double> means;
  means.reserve(resamples);
  const std::size_t n = values.size();
  for (std::size_t b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng.below(n)];
    means.push_back(s / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  const auto idx = [&](double q) {
    return means[std::min(resamples - 1, static_cast<std::size_t>(q * static_cast<double>(resamples)))];
  };
  Estimate e = full.estimate(level);
  e.lo = idx(tail);
  e.hi = idx(1.0 - tail);
  return e;
}

Estimate exact(double v) { return {v, 0.0, v, v, 0}; }

}  // namespace

double TailChainPath::product(std::size_t n) const {
  if (n == 0) return 1.0;
  if (n <= products.size()) return products[n - 1];
  if (death_time) return 0.0;
  throw InvalidArgument("TailChainPath: index beyond simulated range");
}

TailChainPath simulate_tail_chain(const TailDistribution& g, double t0, std::size_t horizon, double kill_epsilon,
                                  Rng& rng, std::size_t min_steps) {
  require(horizon >= 1, "simulate_tail_chain: horizon must be >= 1");
  require(kill_epsilon > 0.0, "simulate_tail_chain: kill_epsilon must be positive");
  require(t0 >= 0.0, "simulate_tail_chain: T0 must be >= 0");
  TailChainPath path;
  path.t0 = t0;
  double p = 1.0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    const double xi = g.sample(rng);
    p *= xi;
    path.xi.push_back(xi);
    path.products.push_back(p);
    if (p == 0.0) {
      path.death_time = n;
      return path;
    }
    if (p < kill_epsilon && n >= min_steps) return path;
  }
  path.truncated = true;
  return path;
}

std::string_view to_string(Transience t) {
  switch (t) {
    case Transience::transient_by_atom: return "transient_by_atom";
    case Transience::transient_by_drift: return "transient_by_drift";
    case Transience::not_transient: return "not_transient";
    case Transience::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TransienceReport check_transience(const TailDistribution& g, double alpha, std::size_t n_probe, Rng& rng,
                                  double level) {
  (void)alpha;
  TransienceReport report;
  if (g.point_mass_at_zero() > 0.0) {
    report.verdict = Transience::transient_by_atom;
    report.mean_log = exact(-std::numeric_limits<double>::infinity());
    report.analytic = true;
    return report;
  }
  const double closed = g.mean_log();
  if (std::isfinite(closed)) {
    report.analytic = true;
    report.mean_log = exact(closed);
  } else {
    require(n_probe >= 2, "check_transience: n_probe must be >= 2");
    RunningStats logs;
    for (std::size_t i = 0; i < n_probe; ++i) logs.add(std::log(g.sample(rng)));
    report.mean_log = logs.estimate(level);
  }
  if (report.mean_log.hi < 0.0) {
    report.verdict = Transience::transient_by_drift;
  } else if (report.mean_log.lo >= 0.0) {
    report.verdict = Transience::not_transient;
  } else {
    report.verdict = Transience::inconclusive;
  }
  return report;
}

bool sup_moment_certified(const TailDistribution& g, double alpha) {
  return g.upper_bound() <= 1.0 || g.moment(alpha) < 1.0;
}

SupStatistics sup_statistics(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                             std::size_t n_reps, Rng& rng, double level) {
  require(alpha > 0.0, "sup_statistics: alpha must be positive");
  require(n_reps >= 2, "sup_statistics: n_reps must be >= 2");
  Rng probe = rng.split(0);
  const TransienceReport tr = check_transience(g, alpha, 100'000, probe, level);
  if (!is_transient(tr.verdict)) {
    throw EstimationError("transience check failed (" + std::string(to_string(tr.verdict)) +
                          "): sup of the tail chain may be infinite");
  }
  // E S^{2 alpha} <= sum_j (E xi^{2 alpha})^j, finite when E xi^{2 alpha} < 1.
  const bool normal_ci = g.moment(2.0 * alpha) < 1.0 || g.upper_bound() <= 1.0;

  TailChainLimits doubled = limits;
  doubled.horizon = limits.horizon * 2;
  doubled.kill_epsilon = limits.kill_epsilon * limits.kill_epsilon;
  doubled.min_steps = limits.min_steps * 2;

  struct Chunk {
    std::array<RunningStats, kStatCount> stats;
    RunningStats doubled_sup_alpha;
    std::size_t truncated = 0;
    std::vector<std::array<double, kStatCount>> values;
  };
  const Rng base = rng.split(1);
  auto chunks = map_ranges(n_reps, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    Chunk out;
    Rng local = base.split(c);
    Rng replay = base.split(c);
    if (!normal_ci) out.values.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) {
      const SupRun run = run_sup(g, limits, local);
      const auto s = path_stats(run.sup, alpha);
      for (std::size_t k = 0; k < kStatCount; ++k) out.stats[k].add(s[k]);
      if (run.truncated) ++out.truncated;
      if (!normal_ci) out.values.push_back(s);
    }
    // Common random numbers: the doubled-horizon runs replay the same stream.
    for (std::size_t i = b; i < e; ++i) {
      const SupRun run = run_sup(g, doubled, replay);
      out.doubled_sup_alpha.add(std::pow(run.sup, alpha));
    }
    return out;
  });

  std::array<RunningStats, kStatCount> total;
  RunningStats doubled_total;
  SupStatistics result;
  for (const auto& ch : chunks) {
    for (std::size_t k = 0; k < kStatCount; ++k) total[k].merge(ch.stats[k]);
    doubled_total.merge(ch.doubled_sup_alpha);
    result.truncated_paths += ch.truncated;
  }
  std::array<Estimate, kStatCount> est;
  if (normal_ci) {
    for (std::size_t k = 0; k < kStatCount; ++k) est[k] = total[k].estimate(level);
  } else {
    for (std::size_t k = 0; k < kStatCount; ++k) {
      std::vector<double> column;
      column.reserve(n_reps);
      for (const auto& ch : chunks)
        for (const auto& v : ch.values) column.push_back(v[k]);
      est[k] = percentile_bootstrap(column, level, rng.split(kBootstrapStream + k));
    }
  }
  result.p_sup_le_1 = est[kLe1];
  result.e_sup_alpha = est[kSupA];
  result.e_sup_alpha_above_1 = est[kSupAAbove];
  result.c = est[kC];
  result.theta = est[kTheta];
  result.n_reps = n_reps;
  result.normal_ci = normal_ci;
  result.horizon_doubling_delta = std::abs(doubled_total.mean() - total[kSupA].mean());
  result.horizon_doubling_agrees =
      result.horizon_doubling_delta <= std::max(result.e_sup_alpha.hi - result.e_sup_alpha.value, 1e-12);
  return result;
}

std::optional<double> cramer_exponent(const TailDistribution& g) {
  if (g.upper_bound() <= 1.0) return std::nullopt;
  if (g.point_mass_at_zero() == 0.0 && !(g.mean_log() < 0.0)) return std::nullopt;
  auto m = [&](double k) { return g.moment(k); };
  double hi = 1.0;
  while (m(hi) <= 1.0) {
    hi *= 2.0;
    if (hi > 1e4) return std::nullopt;
  }
  double lo = hi;
  while (!(m(lo) < 1.0)) {
    lo /= 2.0;
    if (lo < 1e-9) return std::nullopt;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (m(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Estimate sup_tail_moment(const TailDistribution& g, double alpha, double u, const TailChainLimits& limits,
                         std::size_t n_reps, Rng& rng, double level) {
  require(alpha > 0.0, "sup_tail_moment: alpha must be positive");
  require(n_reps >= 2, "sup_tail_moment: n_reps must be >= 2");
  if (g.is_deterministic()) {
    const double rho = g.param_value();
    require(rho < 1.0, "sup_tail_moment: point mass at or above 1");
    return exact(rho > u ? std::pow(rho, alpha) : 0.0);
  }
  if (g.upper_bound() <= 1.0 && u >= g.upper_bound()) return exact(0.0);

  std::optional<double> kappa;
  std::optional<TailDistribution> biased;
  if (u > 1.0) {
    kappa = cramer_exponent(g);
    if (kappa) biased = g.size_biased(*kappa);
  }
  const Rng base = rng.split(0);
  auto parts = map_ranges(n_reps, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng local = base.split(c);
    RunningStats s;
    for (std::size_t i = b; i < e; ++i) {
      if (!biased) {
        const double sup = run_sup(g, limits, local).sup;
        s.add(sup > u ? std::pow(sup, alpha) : 0.0);
        continue;
      }
      double p = 1.0;
      std::size_t n = 0;
      while (p <= u && n < limits.horizon) {
        p *= biased->sample(local);
        ++n;
      }
      if (p <= u) {
        s.add(0.0);
        continue;
      }
      const double weight = std::pow(p, -*kappa);
      double sup = p;
      for (std::size_t k = n + 1; k <= limits.horizon; ++k) {
        p *= g.sample(local);
        sup = std::max(sup, p);
        if (p == 0.0 || (p < limits.kill_epsilon && k >= limits.min_steps)) break;
      }
      s.add(weight * std::pow(sup, alpha));
    }
    return s;
  });
  RunningStats total;
  for (const auto& p : parts) total.merge(p);
  return total.estimate(level);
}

std::vector<double> sample_sup(const TailDistribution& g, const TailChainLimits& limits, std::size_t n, Rng& rng) {
  auto chunks = map_ranges(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng local = rng.split(c);
    std::vector<double> out;
    out.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) out.push_back(run_sup(g, limits, local).sup);
    return out;
  });
  std::vector<double> all;
  all.reserve(n);
  for (auto& ch : chunks) all.insert(all.end(), ch.begin(), ch.end());
  return all;
}

std::vector<Estimate> tail_sup_exceedance(const TailDistribution& g, const std::vector<std::size_t>& m_grid,
                                          double a, const TailChainLimits& limits, std::size_t n_reps, Rng& rng,
                                          double level) {
  require(!m_grid.empty(), "tail_sup_exceedance: empty m_grid");
  require(a > 0.0, "tail_sup_exceedance: a must be positive");
  auto chunks = map_ranges(n_reps, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    Rng local = rng.split(c);
    std::vector<std::size_t> hits(m_grid.size(), 0);
    std::vector<double> suffix;
    for (std::size_t i = b; i < e; ++i) {
      const TailChainPath path =
          simulate_tail_chain(g, 1.0, limits.horizon, limits.kill_epsilon, local, limits.min_steps);
      // suffix[n] = sup_{j >= n+1} xi(j)
      suffix.assign(path.products.size() + 1, 0.0);
      for (std::size_t n = path.products.size(); n-- > 0;) suffix[n] = std::max(suffix[n + 1], path.products[n]);
      for (std::size_t k = 0; k < m_grid.size(); ++k) {
        const std::size_t m = std::max<std::size_t>(m_grid[k], 1);
        if (m - 1 < suffix.size() && suffix[m - 1] > a) ++hits[k];
      }
    }
    return hits;
  });
  std::vector<Estimate> out;
  for (std::size_t k = 0; k < m_grid.size(); ++k) {
    std::size_t total = 0;
    for (const auto& ch : chunks) total += ch[k];
    out.push_back(wilson(total, n_reps, level));
  }
  return out;
}

LimitConstants constant_c(const TailDistribution& g, double alpha, const TailChainLimits& limits,
                          std::size_t n_reps, Rng& rng, double level) {
  require(alpha > 0.0, "constant_c: alpha must be positive");
  LimitConstants k;
  k.alpha = alpha;
  if (g.is_deterministic()) {
    const double rho = g.param_value();
    if (rho >= 1.0) {
      throw EstimationError("transience check failed (not_transient): point mass at " + std::to_string(rho));
    }
    // sup_{j>=1} rho^j = rho < 1.
    const double ra = rho == 0.0 ? 0.0 : std::pow(rho, alpha);
    k.e_xi_alpha = exact(ra);
    k.e_sup_alpha = exact(ra);
    k.e_sup_alpha_above_1 = exact(0.0);
    k.p_sup_le_1 = exact(1.0);
    k.c = exact(1.0);
    k.theta_stationary = exact(1.0 - ra);
    k.provenance = {Provenance::Kind::analytic, 0, level};
    return k;
  }
  const SupStatistics s = sup_statistics(g, alpha, limits, n_reps, rng, level);
  const double m = g.moment(alpha);
  if (std::isfinite(m)) {
    k.e_xi_alpha = exact(m);
  } else {
    RunningStats xs;
    Rng local = rng.split(2);
    for (std::size_t i = 0; i < n_reps; ++i) xs.add(std::pow(g.sample(local), alpha));
    k.e_xi_alpha = xs.estimate(level);
  }
  k.e_sup_alpha = s.e_sup_alpha;
  k.e_sup_alpha_above_1 = s.e_sup_alpha_above_1;
  k.p_sup_le_1 = s.p_sup_le_1;
  k.c = s.c;
  k.theta_stationary = s.theta;
  k.provenance = {Provenance::Kind::monte_carlo, n_reps, level};
  return k;
}

ExtremalIndex extremal_index(const LimitConstants& constants) {
  require(constants.q.has_value(), "extremal_index: q is required for the regenerative formula");
  const Estimate& q = *constants.q;
  require(q.value > 1.0, "extremal_index: q <= 1 makes the regenerative formula undefined");
  ExtremalIndex out;
  if (constants.theta_stationary) {
    out.theta_stationary = *constants.theta_stationary;
  } else {
    const double v = constants.c.value - constants.e_sup_alpha.value;
    const double se = constants.c.se + constants.e_sup_alpha.se;
    const double half = (constants.c.hi - constants.c.value) + (constants.e_sup_alpha.hi - constants.e_sup_alpha.value);
    out.theta_stationary = {v, se, v - half, v + half, constants.c.n};
  }
  const double e = constants.e_sup_alpha.value;
  const double d = q.value - 1.0;
  const double v = e / d;
  const double se = std::sqrt(std::pow(constants.e_sup_alpha.se / d, 2) + std::pow(e * q.se / (d * d), 2));
  const double z = constants.provenance.kind == Provenance::Kind::analytic && q.se == 0.0
                       ? 0.0
                       : z_critical(constants.provenance.level);
  out.theta_regenerative = {v, se, v - z * se, v + z * se, q.n};
  return out;
}

void fill_extremal_index(LimitConstants& constants) {
  const ExtremalIndex idx = extremal_index(constants);
  constants.theta_stationary = idx.theta_stationary;
  constants.theta_regenerative = idx.theta_regenerative;
}

}  // namespace exlab
