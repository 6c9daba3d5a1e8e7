#include "exlab/cycles.hpp"

#include <algorithm>
#include <cmath>

#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

namespace {

/// Fills tau_t, max_extremal and max_value for the cycle beginning at
/// `start` with `length` states.
CycleRecord make_cycle(const ChainPath& path, std::size_t start, std::size_t length, double threshold) {
  CycleRecord c;
  c.start = start;
  c.length = length;
  c.tau_a = length - 1;
  c.first_state = path.states[start];
  bool crossed = false;
  for (std::size_t j = 0; j < length; ++j) {
    const double x = path.states[start + j];
    c.max_value = std::max(c.max_value, x);
    if (!crossed) {
      if (x <= threshold) {
        crossed = true;
        c.tau_t = j;
      } else {
        c.max_extremal = std::max(c.max_extremal, x);
      }
    }
  }
  if (!crossed) throw InvalidArgument("decompose: downcrossing level lies below an atom state");
  return c;
}

}  // namespace

CycleDecomposition decompose(const ChainPath& path, double threshold, double level) {
  require(!path.states.empty(), "decompose: empty path");
  require(path.atom_flags.size() == path.states.size(), "decompose: atom_flags size mismatch");
  CycleDecomposition d;
  d.threshold = threshold;
  d.path_length = path.size();
  std::size_t start = 0;
  bool have_initial = false;
  RunningStats lengths;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (!path.atom_flags[j]) continue;
    ++d.atom_visits;
    const std::size_t length = j - start + 1;
    CycleRecord c = make_cycle(path, start, length, threshold);
    if (!have_initial) {
      d.initial_cycle = c;
      have_initial = true;
    } else {
      d.cycles.push_back(c);
      lengths.add(static_cast<double>(length));
    }
    d.renewal_times.push_back(j + 1);
    start = j + 1;
  }
  if (d.cycles.empty()) throw EstimationError("no regeneration observed");
  d.q_hat = lengths.estimate(level);
  return d;
}

std::vector<double> extremal_component(const CycleRecord& cycle, const ChainPath& path, double threshold) {
  require(cycle.start + cycle.length <= path.size(), "extremal_component: cycle does not belong to path");
  std::vector<double> out;
  for (std::size_t j = 0; j < cycle.length; ++j) {
    const double x = path.states[cycle.start + j];
    if (x <= threshold) break;
    out.push_back(x);
  }
  return out;
}

namespace {

TailFit fit_tail(const std::vector<double>& maxima, double t, double b_t, double alpha,
                 const std::vector<double>& x_grid) {
  const std::size_t n = maxima.size();
  const double nn = static_cast<double>(n);
  TailFit fit;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < x_grid.size(); ++k) {
    const double level = b_t * x_grid[k];
    const auto count = static_cast<std::size_t>(
        std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m > level; }));
    TailFitRow row;
    row.x = x_grid[k];
    row.count = count;
    row.p_hat = static_cast<double>(count) / nn;
    row.scaled = t * row.p_hat * std::pow(row.x, alpha);
    row.zero_count = count == 0;
    fit.rows.push_back(row);
    if (count > 0) used.push_back(k);
  }
  if (used.empty()) return fit;

  // Intercept with slope fixed at -alpha, weights = counts (inverse variance of log p_hat).
  double wsum = 0.0, log_c = 0.0;
  for (std::size_t k : used) {
    const auto& r = fit.rows[k];
    const double w = static_cast<double>(r.count);
    wsum += w;
    log_c += w * std::log(r.scaled);
  }
  log_c /= wsum;
  fit.c_hat = std::exp(log_c);

  // Unconstrained slope.
  double lbar = 0.0, ybar = 0.0;
  for (std::size_t k : used) {
    lbar += std::log(fit.rows[k].x);
    ybar += std::log(t * fit.rows[k].p_hat);
  }
  lbar /= static_cast<double>(used.size());
  ybar /= static_cast<double>(used.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k : used) {
    const double lx = std::log(fit.rows[k].x) - lbar;
    sxx += lx * lx;
    sxy += lx * (std::log(t * fit.rows[k].p_hat) - ybar);
  }
  const bool have_slope = used.size() >= 2 && sxx > 0.0;
  if (have_slope) fit.alpha_hat = -sxy / sxx;

  // Influence of one cycle on log p_hat(x) is (1{M > b x} - p)/p.
  double var_c = 0.0, var_a = 0.0;
  for (double m : maxima) {
    double psi_c = 0.0, psi_a = 0.0;
    for (std::size_t k : used) {
      const auto& r = fit.rows[k];
      const double infl = ((m > b_t * r.x ? 1.0 : 0.0) - r.p_hat) / r.p_hat;
      psi_c += static_cast<double>(r.count) * infl / wsum;
      if (have_slope) psi_a += (std::log(r.x) - lbar) / sxx * infl;
    }
    var_c += psi_c * psi_c;
    var_a += psi_a * psi_a;
  }
  fit.c_se = fit.c_hat * std::sqrt(var_c / nn) / std::sqrt(nn);
  fit.alpha_se = have_slope ? std::sqrt(var_a / nn) / std::sqrt(nn) : 0.0;
  return fit;
}

}  // namespace

std::vector<TailFitAtT> cycle_max_tail_fit(const CycleDecomposition& decomp, const ScalingFunction& b,
                                           const std::vector<double>& t_grid, const std::vector<double>& x_grid,
                                           std::size_t min_cycles, std::size_t min_exceedances) {
  require(!t_grid.empty() && !x_grid.empty(), "cycle_max_tail_fit: empty grid");
  for (double x : x_grid) require(x > 0.0, "cycle_max_tail_fit: x_grid must be positive");
  if (decomp.cycles.size() < min_cycles) {
    throw EstimationError("cycle_max_tail_fit: need at least " + std::to_string(min_cycles) + " cycles, have " +
                          std::to_string(decomp.cycles.size()));
  }
  std::vector<double> full, extremal;
  full.reserve(decomp.cycles.size());
  extremal.reserve(decomp.cycles.size());
  for (const auto& c : decomp.cycles) {
    full.push_back(c.max_value);
    extremal.push_back(c.max_extremal);
  }
  std::vector<TailFitAtT> out;
  for (double t : t_grid) {
    TailFitAtT entry;
    entry.t = t;
    entry.b_t = b(t);
    entry.full_cycle = fit_tail(full, t, entry.b_t, b.alpha(), x_grid);
    entry.extremal_component = fit_tail(extremal, t, entry.b_t, b.alpha(), x_grid);
    out.push_back(std::move(entry));
  }
  std::size_t largest_count = 0;
  for (const auto& r : out.back().full_cycle.rows) largest_count = std::max(largest_count, r.count);
  if (largest_count < min_exceedances) {
    throw EstimationError("cycle_max_tail_fit: too few exceedances at the largest t (" +
                          std::to_string(largest_count) + ")");
  }
  return out;
}

MaxLawReport max_distribution_check(const KernelSpec& kernel, const ScalingFunction& b, std::size_t n,
                                    const std::vector<double>& x_grid, std::size_t n_reps,
                                    const LimitConstants& constants, Rng& rng, double level) {
  kernel.validate();
  require(n >= 1 && n_reps >= 1, "max_distribution_check: n and n_reps must be >= 1");
  require(constants.q.has_value(), "max_distribution_check: constants must carry q");
  MaxLawReport report;
  report.b_n = b(static_cast<double>(n));
  auto maxima = map_ranges(n_reps, 16, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<double> out;
    for (std::size_t r = begin; r < end; ++r) {
      Rng local = rng.split(r);
      double x = kernel.h_return.sample(local);
      double m = x;
      std::uint64_t outside = kernel.in_atom(x) ? 0 : 1;
      for (std::size_t j = 1; j <= n; ++j) {
        x = step(kernel, x, local);
        m = std::max(m, x);
        outside = kernel.in_atom(x) ? 0 : outside + 1;
        if (outside > kDefaultCycleCap) throw GuardTripped("max_distribution_check: cycle cap exceeded");
      }
      out.push_back(m);
    }
    (void)c;
    return out;
  });
  std::vector<double> all;
  for (auto& ch : maxima) all.insert(all.end(), ch.begin(), ch.end());
  const double rate = constants.c.value / constants.q->value;
  for (double x : x_grid) {
    require(x > 0.0, "max_distribution_check: x must be positive");
    const double level_x = report.b_n * x;
    const auto k = static_cast<std::size_t>(
        std::count_if(all.begin(), all.end(), [&](double m) { return m <= level_x; }));
    MaxLawRow row;
    row.x = x;
    row.empirical = wilson(k, all.size(), level);
    row.limit = std::exp(-rate * std::pow(x, -constants.alpha));
    report.sup_distance = std::max(report.sup_distance, std::abs(row.empirical.value - row.limit));
    report.ci_half_width = std::max(report.ci_half_width, (row.empirical.hi - row.empirical.lo) / 2.0);
    report.rows.push_back(row);
  }
  return report;
}

Estimate estimate_q(const KernelSpec& kernel, std::size_t n_steps, std::size_t n_paths, Rng& rng, double level) {
  require(n_paths >= 1, "estimate_q: n_paths must be >= 1");
  auto parts = map_chunks(n_paths, [&](std::size_t p) {
    Rng local = rng.split(p);
    const ChainPath path = simulate_path(kernel, InitialState::from_h(), n_steps, local);
    RunningStats s;
    const CycleDecomposition d = decompose(path, kernel.atom_upper, level);
    for (const auto& c : d.cycles) s.add(static_cast<double>(c.length));
    return s;
  });
  RunningStats total;
  for (const auto& s : parts) total.merge(s);
  return total.estimate(level);
}

}  // namespace exlab
