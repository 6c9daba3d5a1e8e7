#include "exlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

std::string_view to_string(ConditionId id) {
  switch (id) {
    case ConditionId::drift_back: return "drift_back";
    case ConditionId::moment_uniform: return "moment_uniform";
    case ConditionId::within_cycle: return "within_cycle";
    case ConditionId::within_cycle_mrv: return "within_cycle_mrv";
    case ConditionId::drift_away_z: return "drift_away_z";
    case ConditionId::cycle_regularity: return "cycle_regularity";
    case ConditionId::tau_tightness: return "tau_tightness";
    case ConditionId::regularity_kernel: return "regularity_kernel";
    case ConditionId::joint_rv_full: return "joint_rv_full";
  }
  return "drift_back";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kChunk = 4096;
constexpr std::size_t kFirstBatch = 1024;

/// X_0 .. X_{tau_A}, or X_0 .. X_cap when the atom is not reached.
struct Excursion {
  std::vector<double> xs;
  std::size_t tau_t = kNone;  // first j >= 0 with X_j <= downcrossing level
  std::size_t tau_a = kNone;  // first j >= 0 with X_j in A
  bool resolved() const { return tau_a != kNone; }
};

void run_excursion(const KernelSpec& k, double x0, double level, std::size_t cap, Rng& rng, Excursion& e) {
  e.xs.clear();
  e.tau_t = kNone;
  e.tau_a = kNone;
  double x = x0;
  for (std::size_t j = 0;; ++j) {
    e.xs.push_back(x);
    if (e.tau_t == kNone && x <= level) e.tau_t = j;
    if (k.in_atom(x)) {
      e.tau_a = j;
      return;
    }
    if (j == cap) return;
    x = step(k, x, rng);
  }
}

/// max X_j over lo <= j < hi (0 when empty).
double range_max(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t j = lo; j < std::min(hi, xs.size()); ++j) m = std::max(m, xs[j]);
  return m;
}

Estimate scaled(Estimate e, double w) {
  e.value *= w;
  e.se *= w;
  e.lo *= w;
  e.hi *= w;
  return e;
}

struct Counts {
  std::vector<std::size_t> hits;
  std::vector<std::size_t> unresolved;
  std::size_t n = 0;
};

/// Runs `fn(rng, excursion, hits, unresolved)` for up to n_total replicates in
/// growing batches. Stops early once every output's lower bound, times
/// `weight`, exceeds the tolerance. Streams depend only on (batch, chunk).
template <class Fn>
Counts count_hits(std::size_t n_total, std::size_t outputs, double weight, const DiagnosticOptions& o,
                  const Rng& base, Fn fn) {
  Counts total;
  total.hits.assign(outputs, 0);
  total.unresolved.assign(outputs, 0);
  std::size_t batch_size = std::min(kFirstBatch, n_total);
  for (std::uint64_t batch = 0; total.n < n_total; ++batch) {
    const std::size_t size = std::min(batch_size, n_total - total.n);
    const Rng stream = base.split(batch);
    auto parts = map_ranges(size, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
      Rng local = stream.split(c);
      Counts part;
      part.hits.assign(outputs, 0);
      part.unresolved.assign(outputs, 0);
      Excursion ex;
      std::vector<std::uint8_t> hit(outputs), open(outputs);
      for (std::size_t i = b; i < e; ++i) {
        std::fill(hit.begin(), hit.end(), 0);
        std::fill(open.begin(), open.end(), 0);
        fn(local, ex, hit, open);
        for (std::size_t k = 0; k < outputs; ++k) {
          part.hits[k] += hit[k] | open[k];
          part.unresolved[k] += open[k];
        }
      }
      part.n = e - b;
      return part;
    });
    for (const auto& p : parts) {
      for (std::size_t k = 0; k < outputs; ++k) {
        total.hits[k] += p.hits[k];
        total.unresolved[k] += p.unresolved[k];
      }
      total.n += p.n;
    }
    batch_size = std::min(batch_size * 2, o.batch);
    bool decided = true;
    for (std::size_t k = 0; k < outputs && decided; ++k) {
      decided = weight * wilson(total.hits[k], total.n, o.level).lo > o.tolerance;
    }
    if (decided) break;
  }
  return total;
}

/// Verdict for a sequence that should decrease to 0 (last entry is the
/// closest to the limit).
Verdict decreasing_verdict(const std::vector<Estimate>& seq, double tol, std::string& why) {
  if (seq.empty()) {
    why = "no estimates";
    return Verdict::inconclusive;
  }
  bool trend = true;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    if (seq[k].lo > seq[k - 1].hi) trend = false;
  }
  std::ostringstream os;
  os << "final estimate " << seq.back().value << " [" << seq.back().lo << ", " << seq.back().hi << "] vs tolerance "
     << tol;
  if (seq.back().lo > tol) {
    why = os.str() + ": lower bound above tolerance";
    return Verdict::fail;
  }
  if (seq.back().hi < tol && trend) {
    why = os.str() + ": upper bound below tolerance, no significant increase along the grid";
    return Verdict::pass;
  }
  why = os.str() + (trend ? ": interval straddles tolerance" : ": significant increase along the grid");
  return Verdict::inconclusive;
}

/// Combines per-sequence verdicts: any fail fails, all pass passes.
Verdict combine(const std::vector<Verdict>& vs) {
  if (vs.empty()) return Verdict::inconclusive;
  bool all_pass = true;
  for (Verdict v : vs) {
    if (v == Verdict::fail) return Verdict::fail;
    if (v != Verdict::pass) all_pass = false;
  }
  return all_pass ? Verdict::pass : Verdict::inconclusive;
}

void check_common(const DiagnosticOptions& o) {
  require(!o.t_grid.empty(), "diagnostics: empty t_grid");
  for (double t : o.t_grid) require(t > 1.0, "diagnostics: t values must exceed 1");
  require(std::is_sorted(o.t_grid.begin(), o.t_grid.end()), "diagnostics: t_grid must be increasing");
  require(o.tolerance > 0.0, "diagnostics: tolerance must be positive");
  require(o.level > 0.0 && o.level < 1.0, "diagnostics: level must lie in (0, 1)");
  require(o.a > 0.0 && o.delta > 0.0, "diagnostics: a and delta must be positive");
  require(o.n_reps >= 1 && o.reps_per_unit_t >= 1 && o.batch >= 1, "diagnostics: replicate counts must be >= 1");
}

std::size_t t_scaled_reps(const DiagnosticOptions& o, double t) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(o.reps_per_unit_t) * t));
}

double h_tail_start(const KernelSpec& k, double threshold, Rng& rng) {
  if (k.h_return.survival(threshold) <= 0.0) {
    throw EstimationError("no conditioning samples: H has no mass above " + std::to_string(threshold));
  }
  return k.h_return.sample_above(threshold, rng);
}

}  // namespace

std::vector<SmallStart> default_small_starts(const KernelSpec& kernel) {
  return {
      {"t^-1/2", [](double t) { return 1.0 / std::sqrt(t); }},
      {"1/log t", [](double t) { return 1.0 / std::log(t); }},
      {"y(t)", [kernel](double t) { return extremal_boundary_value(kernel, t); }},
  };
}

ConditionReport check_drift_back(const KernelSpec& kernel, const ScalingFunction& b, const DiagnosticOptions& o,
                                 Rng& rng) {
  kernel.validate();
  check_common(o);
  require(!o.m_grid.empty() && std::is_sorted(o.m_grid.begin(), o.m_grid.end()),
          "drift_back: m_grid must be non-empty and increasing");
  ConditionReport r;
  r.id = ConditionId::drift_back;
  const std::size_t nm = o.m_grid.size();
  std::vector<Estimate> last;
  for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
    const double t = o.t_grid[ti];
    const double bt = b(t);
    const double level = downcrossing_level(kernel, bt);
    const Counts c = count_hits(o.n_reps, nm, 1.0, o, rng.split(ti), [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
      run_excursion(kernel, h_tail_start(kernel, o.delta * bt, g), level, o.step_cap, g, ex);
      const std::size_t end = ex.tau_t == kNone ? ex.xs.size() : ex.tau_t;
      for (std::size_t k = 0; k < nm; ++k) {
        if (ex.tau_t == kNone) {
          open[k] = 1;
        } else {
          hit[k] = range_max(ex.xs, o.m_grid[k], end) > o.a * bt;
        }
      }
    });
    last.clear();
    for (std::size_t k = 0; k < nm; ++k) {
      GridEstimate e;
      e.t = t;
      e.m = static_cast<double>(o.m_grid[k]);
      e.a = o.a;
      e.delta = o.delta;
      e.estimate = wilson(c.hits[k], c.n, o.level);
      e.unresolved = c.unresolved[k];
      r.estimates.push_back(e);
      last.push_back(e.estimate);
    }
  }
  r.verdict = decreasing_verdict(last, o.tolerance, r.rationale);
  r.rationale = "largest t, along m: " + r.rationale;
  return r;
}

ConditionReport check_moment_uniform(const KernelSpec& kernel, const ScalingFunction& b, const DiagnosticOptions& o,
                                     Rng& rng, MomentHorizon horizon) {
  kernel.validate();
  check_common(o);
  std::vector<double> deltas = o.delta_grid;
  require(!deltas.empty(), "moment_uniform: empty delta_grid");
  std::sort(deltas.rbegin(), deltas.rend());
  ConditionReport r;
  r.id = ConditionId::moment_uniform;
  const std::size_t nd = deltas.size();
  const std::size_t m_start = horizon == MomentHorizon::cycle ? o.m0_prime.value_or(o.m0) : o.m0;
  std::vector<Estimate> last;
  for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
    const double t = o.t_grid[ti];
    const double bt = b(t);
    const double level = downcrossing_level(kernel, bt);
    const Counts c =
        count_hits(t_scaled_reps(o, t), nd, t, o, rng.split(ti), [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
          const double x0 = kernel.h_return.sample(g);
          if (x0 > deltas.front() * bt) return;
          run_excursion(kernel, x0, level, o.step_cap, g, ex);
          const std::size_t stop = horizon == MomentHorizon::cycle ? ex.tau_a : ex.tau_t;
          const bool unresolved = stop == kNone;
          const double sup = unresolved ? 0.0 : range_max(ex.xs, m_start, stop);
          for (std::size_t k = 0; k < nd; ++k) {
            if (x0 > deltas[k] * bt) continue;
            if (unresolved) {
              open[k] = 1;
            } else {
              hit[k] = sup > o.a * bt;
            }
          }
        });
    last.clear();
    for (std::size_t k = 0; k < nd; ++k) {
      GridEstimate e;
      e.t = t;
      e.m = static_cast<double>(m_start);
      e.a = o.a;
      e.delta = deltas[k];
      e.estimate = scaled(wilson(c.hits[k], c.n, o.level), t);
      e.t_scaled = true;
      e.unresolved = c.unresolved[k];
      e.label = horizon == MomentHorizon::cycle ? "tau_A horizon" : "extremal component";
      r.estimates.push_back(e);
      last.push_back(e.estimate);
    }
  }
  r.verdict = decreasing_verdict(last, o.tolerance, r.rationale);
  r.rationale = "largest t, along decreasing delta: " + r.rationale;
  return r;
}

WithinCycleReports check_within_cycle(const KernelSpec& kernel, const ScalingFunction& b, const DiagnosticOptions& o,
                                      Rng& rng) {
  kernel.validate();
  check_common(o);
  WithinCycleReports out;
  out.conditional.id = ConditionId::within_cycle;
  out.t_scaled.id = ConditionId::within_cycle_mrv;
  std::vector<Estimate> seq_cond, seq_scaled;
  auto post_downcrossing = [&](Excursion& ex, double bt, auto& hit, auto& open) {
    if (!ex.resolved()) {
      open[0] = 1;
      return;
    }
    hit[0] = range_max(ex.xs, ex.tau_t + 1, ex.tau_a) > o.a * bt;
  };
  for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
    const double t = o.t_grid[ti];
    const double bt = b(t);
    const double level = downcrossing_level(kernel, bt);
    const Counts cc = count_hits(o.n_reps, 1, 1.0, o, rng.split(2 * ti), [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
      run_excursion(kernel, h_tail_start(kernel, o.delta * bt, g), level, o.step_cap, g, ex);
      post_downcrossing(ex, bt, hit, open);
    });
    const Counts cs = count_hits(t_scaled_reps(o, t), 1, t, o, rng.split(2 * ti + 1),
                                 [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
                                   run_excursion(kernel, kernel.h_return.sample(g), level, o.step_cap, g, ex);
                                   post_downcrossing(ex, bt, hit, open);
                                 });
    GridEstimate e;
    e.t = t;
    e.a = o.a;
    e.delta = o.delta;
    e.estimate = wilson(cc.hits[0], cc.n, o.level);
    e.unresolved = cc.unresolved[0];
    out.conditional.estimates.push_back(e);
    seq_cond.push_back(e.estimate);
    e.delta = 0.0;
    e.estimate = scaled(wilson(cs.hits[0], cs.n, o.level), t);
    e.t_scaled = true;
    e.unresolved = cs.unresolved[0];
    out.t_scaled.estimates.push_back(e);
    seq_scaled.push_back(e.estimate);
  }
  out.conditional.verdict = decreasing_verdict(seq_cond, o.tolerance, out.conditional.rationale);
  out.conditional.rationale = "along t: " + out.conditional.rationale;
  out.t_scaled.verdict = decreasing_verdict(seq_scaled, o.tolerance, out.t_scaled.rationale);
  out.t_scaled.rationale = "along t: " + out.t_scaled.rationale;
  return out;
}

ConditionReport check_drift_away_z(const KernelSpec& kernel, const DiagnosticOptions& o, Rng& rng) {
  kernel.validate();
  check_common(o);
  require(!o.m_grid.empty() && std::is_sorted(o.m_grid.begin(), o.m_grid.end()),
          "drift_away_z: m_grid must be non-empty and increasing");
  ConditionReport r;
  r.id = ConditionId::drift_away_z;
  const std::size_t nm = o.m_grid.size();
  std::vector<Estimate> last;
  for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
    const double t = o.t_grid[ti];
    const Counts c = count_hits(o.n_reps, nm, 1.0, o, rng.split(ti), [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
      run_excursion(kernel, t, kernel.atom_upper, o.step_cap, g, ex);
      for (std::size_t k = 0; k < nm; ++k) {
        if (!ex.resolved()) {
          open[k] = 1;
        } else {
          hit[k] = range_max(ex.xs, o.m_grid[k], ex.tau_a) > t * o.a;
        }
      }
    });
    last.clear();
    for (std::size_t k = 0; k < nm; ++k) {
      GridEstimate e;
      e.t = t;
      e.m = static_cast<double>(o.m_grid[k]);
      e.a = o.a;
      e.estimate = wilson(c.hits[k], c.n, o.level);
      e.unresolved = c.unresolved[k];
      r.estimates.push_back(e);
      last.push_back(e.estimate);
    }
  }
  r.verdict = decreasing_verdict(last, o.tolerance, r.rationale);
  r.rationale = "largest t, along m: " + r.rationale;
  return r;
}

ConditionReport check_tau_tightness(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                    const DiagnosticOptions& o, Rng& rng) {
  kernel.validate();
  check_common(o);
  require(!starts.empty(), "tau_tightness: no u_t sequences");
  ConditionReport r;
  r.id = ConditionId::tau_tightness;
  const std::size_t nm = o.m_grid.size();
  std::vector<Verdict> verdicts;
  std::vector<std::string> reasons;
  for (std::size_t ui = 0; ui < starts.size(); ++ui) {
    std::vector<Estimate> last;
    for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
      const double t = o.t_grid[ti];
      const double x0 = t * starts[ui].u(t);
      const std::size_t cap = std::min(o.step_cap, o.m_grid.back() + 1);
      const Counts c = count_hits(o.n_reps, nm, 1.0, o, rng.split(ui * 1000 + ti),
                                  [&](Rng& g, Excursion& ex, auto& hit, auto&) {
                                    run_excursion(kernel, x0, kernel.atom_upper, cap, g, ex);
                                    for (std::size_t k = 0; k < nm; ++k) hit[k] = !ex.resolved() || ex.tau_a > o.m_grid[k];
                                  });
      last.clear();
      for (std::size_t k = 0; k < nm; ++k) {
        GridEstimate e;
        e.t = t;
        e.m = static_cast<double>(o.m_grid[k]);
        e.label = starts[ui].name;
        e.estimate = wilson(c.hits[k], c.n, o.level);
        r.estimates.push_back(e);
        last.push_back(e.estimate);
      }
    }
    std::string why;
    verdicts.push_back(decreasing_verdict(last, o.tolerance, why));
    reasons.push_back("u_t=" + starts[ui].name + ": " + why);
  }
  r.verdict = combine(verdicts);
  for (std::size_t i = 0; i < reasons.size(); ++i) r.rationale += (i ? "; " : "") + reasons[i];
  return r;
}

ConditionReport check_cycle_regularity(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                       const DiagnosticOptions& o, Rng& rng) {
  kernel.validate();
  check_common(o);
  require(!starts.empty(), "cycle_regularity: no u_t sequences");
  ConditionReport r;
  r.id = ConditionId::cycle_regularity;
  std::vector<Verdict> direct;
  std::string direct_why;
  for (std::size_t ui = 0; ui < starts.size(); ++ui) {
    std::vector<Estimate> seq;
    for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
      const double t = o.t_grid[ti];
      const double x0 = t * starts[ui].u(t);
      const Counts c = count_hits(o.n_reps, 1, 1.0, o, rng.split(ui * 1000 + ti),
                                  [&](Rng& g, Excursion& ex, auto& hit, auto& open) {
                                    run_excursion(kernel, x0, kernel.atom_upper, o.step_cap, g, ex);
                                    if (!ex.resolved()) {
                                      open[0] = 1;
                                    } else {
                                      hit[0] = range_max(ex.xs, 1, ex.tau_a) > t * o.a;
                                    }
                                  });
      GridEstimate e;
      e.t = t;
      e.a = o.a;
      e.label = "direct u_t=" + starts[ui].name;
      e.estimate = wilson(c.hits[0], c.n, o.level);
      e.unresolved = c.unresolved[0];
      r.estimates.push_back(e);
      seq.push_back(e.estimate);
    }
    std::string why;
    direct.push_back(decreasing_verdict(seq, o.tolerance, why));
    direct_why += (ui ? "; " : "") + starts[ui].name + ": " + why;
  }
  Rng tight_rng = rng.split(0x7157);
  ConditionReport tight = check_tau_tightness(kernel, starts, o, tight_rng);
  for (auto e : tight.estimates) {
    e.label = "tightness u_t=" + e.label;
    r.estimates.push_back(e);
  }
  const Verdict d = combine(direct);
  if (d == Verdict::pass || tight.verdict == Verdict::pass) {
    r.verdict = Verdict::pass;
  } else if (d == Verdict::fail && tight.verdict == Verdict::fail) {
    r.verdict = Verdict::fail;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  r.rationale = "direct route " + std::string(to_string(d)) + " (" + direct_why + "); tau_A tightness route " +
                std::string(to_string(tight.verdict));
  return r;
}

ConditionReport check_regularity_kernel(const KernelSpec& kernel, const std::vector<SmallStart>& starts,
                                        const DiagnosticOptions& o, Rng& rng) {
  kernel.validate();
  check_common(o);
  require(!starts.empty() && !o.eta_grid.empty(), "regularity_kernel: empty u_t family or eta grid");
  ConditionReport r;
  r.id = ConditionId::regularity_kernel;
  const std::size_t ne = o.eta_grid.size();
  std::vector<Verdict> verdicts;
  std::string why_all;
  for (std::size_t ui = 0; ui < starts.size(); ++ui) {
    std::vector<std::vector<Estimate>> seqs(ne);
    for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
      const double t = o.t_grid[ti];
      const double x0 = t * starts[ui].u(t);
      const Counts c = count_hits(o.n_reps, ne, 1.0, o, rng.split(ui * 1000 + ti),
                                  [&](Rng& g, Excursion&, auto& hit, auto&) {
                                    const double y = step(kernel, x0, g) / t;
                                    for (std::size_t k = 0; k < ne; ++k) hit[k] = y > o.eta_grid[k];
                                  });
      for (std::size_t k = 0; k < ne; ++k) {
        GridEstimate e;
        e.t = t;
        e.eta = o.eta_grid[k];
        e.label = starts[ui].name;
        e.estimate = wilson(c.hits[k], c.n, o.level);
        r.estimates.push_back(e);
        seqs[k].push_back(e.estimate);
      }
    }
    for (std::size_t k = 0; k < ne; ++k) {
      std::string why;
      verdicts.push_back(decreasing_verdict(seqs[k], o.tolerance, why));
      if (verdicts.back() != Verdict::pass) why_all += starts[ui].name + ", eta=" + std::to_string(o.eta_grid[k]) + ": " + why + "; ";
    }
  }
  r.verdict = combine(verdicts);
  r.rationale = r.verdict == Verdict::pass ? "every (u_t, eta) sequence falls below tolerance at the largest t" : why_all;
  return r;
}

std::vector<std::vector<Interval>> default_cylinders(std::size_t m) {
  require(m >= 1, "default_cylinders: m must be >= 1");
  auto all = [&](double lo0) {
    std::vector<Interval> c(m + 1, Interval::everything());
    c[0] = Interval::above(lo0);
    return c;
  };
  std::vector<std::vector<Interval>> out;
  out.push_back(all(1.0));
  auto c = all(1.0);
  c[1] = Interval::above(0.25);
  out.push_back(c);
  c = all(0.5);
  c[m] = Interval::above(0.125);
  out.push_back(c);
  c = all(1.0);
  for (std::size_t j = 1; j <= m; ++j) c[j] = Interval::above(std::pow(0.5, static_cast<double>(j) + 1.0));
  out.push_back(c);
  return out;
}

namespace {

std::string describe(const std::vector<Interval>& c) {
  std::ostringstream os;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j) os << " x ";
    os << (c[j].lo_closed ? "[" : "(") << c[j].lo << "," << c[j].hi << "]";
  }
  return os.str();
}

/// Index j >= 1 when the cylinder constrains only X_0 > lo and X_j > x.
std::optional<std::size_t> single_marginal(const std::vector<Interval>& c) {
  std::optional<std::size_t> idx;
  if (!std::isinf(c[0].hi)) return std::nullopt;
  for (std::size_t j = 1; j < c.size(); ++j) {
    const bool free = c[j].lo == 0.0 && c[j].lo_closed && std::isinf(c[j].hi);
    if (free) continue;
    if (idx || !std::isinf(c[j].hi) || c[j].lo <= 0.0) return std::nullopt;
    idx = j;
  }
  return idx;
}

}  // namespace

ConditionReport check_joint_rv_full(const KernelSpec& kernel, const ScalingFunction& b, const DiagnosticOptions& o,
                                    Rng& rng) {
  kernel.validate();
  check_common(o);
  const auto cylinders = o.cylinders.empty() ? default_cylinders(o.joint_m) : o.cylinders;
  const double alpha = b.alpha();
  const TailDistribution& g = kernel.z_law;
  ConditionReport r;
  r.id = ConditionId::joint_rv_full;
  const double z = z_critical(1.0 - (1.0 - o.level) / static_cast<double>(cylinders.size()));
  bool agree = true;
  std::string why;
  for (std::size_t ci = 0; ci < cylinders.size(); ++ci) {
    const auto& cyl = cylinders[ci];
    require(cyl.size() >= 2, "joint_rv_full: cylinder needs at least (X_0, X_1)");
    require(cyl[0].lo > 0.0, "joint_rv_full: cylinder must be bounded away from the origin in X_0");
    Rng mu_rng = rng.split(0x10000 + ci);
    const Estimate mu = mu_cylinder(alpha, g, cyl, o.joint_reps, mu_rng, o.level);
    std::optional<Estimate> marginal;
    if (auto j = single_marginal(cyl)) {
      const double reach = cyl[0].lo * std::pow(g.upper_bound(), static_cast<double>(*j));
      if (reach <= cyl[*j].lo) {
        const double v = std::pow(cyl[*j].lo, -alpha) * std::pow(g.moment(alpha), static_cast<double>(*j));
        marginal = Estimate{v, 0.0, v, v, 0};
      }
    }
    for (std::size_t ti = 0; ti < o.t_grid.size(); ++ti) {
      const double t = o.t_grid[ti];
      const double bt = b(t);
      const double weight = t * kernel.h_return.survival(cyl[0].lo * bt);
      const std::size_t m = cyl.size() - 1;
      const Counts c = count_hits(o.joint_reps, 1, 0.0, o, rng.split(ci * 1000 + ti),
                                  [&](Rng& gen, Excursion&, auto& hit, auto&) {
                                    double x = h_tail_start(kernel, cyl[0].lo * bt, gen);
                                    if (!cyl[0].contains(x / bt)) return;
                                    for (std::size_t j = 1; j <= m; ++j) {
                                      x = step(kernel, x, gen);
                                      if (!cyl[j].contains(x / bt)) return;
                                    }
                                    hit[0] = 1;
                                  });
      GridEstimate e;
      e.t = t;
      e.m = static_cast<double>(m);
      e.label = describe(cyl);
      e.estimate = scaled(wilson(c.hits[0], c.n, o.level), weight);
      const double p = static_cast<double>(c.hits[0]) / static_cast<double>(c.n);
      e.estimate.value = weight * p;
      e.estimate.se = weight * std::sqrt(p * (1.0 - p) / static_cast<double>(c.n));
      e.t_scaled = true;
      e.reference = mu;
      r.estimates.push_back(e);
      if (ti + 1 == o.t_grid.size()) {
        const double slack = z * std::hypot(e.estimate.se, mu.se) + o.tolerance;
        const double diff = std::abs(e.estimate.value - mu.value);
        if (diff > slack) {
          agree = false;
          why += e.label + ": |" + std::to_string(e.estimate.value) + " - " + std::to_string(mu.value) + "| > " +
                 std::to_string(slack) + "; ";
        }
        if (marginal) {
          GridEstimate me = e;
          me.label = "marginal form " + e.label;
          me.reference = marginal;
          r.estimates.push_back(me);
          const double mdiff = std::abs(e.estimate.value - marginal->value);
          const double mslack = z * e.estimate.se + o.tolerance;
          if (mdiff > mslack) {
            agree = false;
            why += "marginal form " + e.label + " off by " + std::to_string(mdiff) + "; ";
          }
        }
      }
    }
  }
  r.verdict = agree ? Verdict::pass : Verdict::fail;
  r.rationale = agree ? "t-scaled cylinder masses at the largest t agree with mu within joint intervals plus tolerance"
                      : why;
  return r;
}

std::vector<ConditionReport> run_diagnostics(const KernelSpec& kernel, const ScalingFunction& b,
                                             const DiagnosticOptions& o, Rng& rng) {
  std::vector<ConditionReport> out;
  Rng r0 = rng.split(1), r1 = rng.split(2), r2 = rng.split(3), r3 = rng.split(4), r4 = rng.split(5),
      r5 = rng.split(6), r6 = rng.split(7);
  out.push_back(check_drift_back(kernel, b, o, r0));
  out.push_back(check_moment_uniform(kernel, b, o, r1));
  auto wc = check_within_cycle(kernel, b, o, r2);
  out.push_back(std::move(wc.conditional));
  out.push_back(std::move(wc.t_scaled));
  const auto starts = default_small_starts(kernel);
  if (kernel.z_law.point_mass_at_zero() == 0.0) {
    out.push_back(check_drift_away_z(kernel, o, r3));
  } else {
    out.push_back(check_cycle_regularity(kernel, starts, o, r4));
  }
  out.push_back(check_regularity_kernel(kernel, starts, o, r5));
  out.push_back(check_joint_rv_full(kernel, b, o, r6));
  return out;
}

}  // namespace exlab
