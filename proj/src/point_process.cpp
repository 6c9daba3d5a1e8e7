#include "exlab/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "exlab/error.hpp"
#include "exlab/stats.hpp"

namespace exlab {

std::string_view to_string(PatternKind k) {
  switch (k) {
    case PatternKind::empirical_Nn: return "empirical_Nn";
    case PatternKind::limit_eta_delta: return "limit_eta_delta";
    case PatternKind::limit_eta: return "limit_eta";
  }
  return "empirical_Nn";
}

namespace {

void check_window(const Window& w) {
  require(std::isfinite(w.s_max) && w.s_max > 0.0, "window: s_max must be positive");
  require(std::isfinite(w.mark_floor) && w.mark_floor > 0.0, "window: mark_floor must be positive");
}

std::size_t last_index(const ChainPath& path, std::size_t n, const Window& window) {
  require(n >= 1, "build_Nn: n must be >= 1");
  const auto last = static_cast<std::size_t>(std::floor(window.s_max * static_cast<double>(n)));
  if (path.size() < last + 1) {
    throw InvalidArgument("build_Nn: path has " + std::to_string(path.size()) + " states, need " +
                          std::to_string(last + 1) + " for s_max*n");
  }
  return last;
}

PointPattern empirical_pattern(std::size_t n, double b_n, const Window& window) {
  PointPattern p;
  p.window = window;
  p.kind = PatternKind::empirical_Nn;
  p.meta.n = n;
  p.meta.b_n = b_n;
  return p;
}

}  // namespace

PointPattern build_Nn(const ChainPath& path, std::size_t n, double b_n, const Window& window) {
  check_window(window);
  require(b_n > 0.0, "build_Nn: b_n must be positive");
  const std::size_t last = last_index(path, n, window);
  PointPattern p = empirical_pattern(n, b_n, window);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j <= last; ++j) {
    const double mark = path.states[j] / b_n;
    if (mark > window.mark_floor) p.points.push_back({static_cast<double>(j) / nn, mark, -1});
  }
  return p;
}

PointPattern build_Nn_restricted(const ChainPath& path, std::size_t n, double b_n, const Window& window,
                                 double delta) {
  check_window(window);
  require(b_n > 0.0, "build_Nn: b_n must be positive");
  require(delta > 0.0, "build_Nn: delta must be positive");
  require(path.atom_flags.size() == path.size(), "build_Nn: atom_flags size mismatch");
  const std::size_t last = last_index(path, n, window);
  PointPattern p = empirical_pattern(n, b_n, window);
  p.meta.delta = delta;
  const double nn = static_cast<double>(n);
  bool keep = path.states[0] >= delta * b_n;
  for (std::size_t j = 0; j <= last; ++j) {
    const double mark = path.states[j] / b_n;
    if (keep && mark > window.mark_floor) p.points.push_back({static_cast<double>(j) / nn, mark, -1});
    // The next cycle starts right after an atom visit.
    if (path.atom_flags[j] && j + 1 < path.size()) keep = path.states[j + 1] >= delta * b_n;
  }
  return p;
}

LimitSample sample_limit(const LimitSpec& spec, Rng& rng) {
  check_window(spec.window);
  require(spec.alpha > 0.0, "sample_limit: alpha must be positive");
  require(spec.q > 0.0, "sample_limit: q must be positive");
  require(spec.delta > 0.0 && std::isfinite(spec.delta),
          "sample_limit: delta must be positive (delta = 0 gives infinitely many points)");
  require(spec.seed_upper > spec.delta, "sample_limit: seed_upper must exceed delta");
  if (spec.mode == LimitMode::eta_approx && !spec.truncation_bound) {
    throw InvalidArgument("sample_limit: eta_approx needs a truncation bound (see prepare_eta_approx)");
  }
  const double a = spec.alpha;
  const double top = std::isinf(spec.seed_upper) ? 0.0 : std::pow(spec.seed_upper, -a);
  const double mass = std::pow(spec.delta, -a) - top;
  const std::uint64_t n_seeds = rng.poisson(spec.window.s_max / spec.q * mass);

  LimitSample out;
  out.pattern.window = spec.window;
  out.pattern.kind = spec.mode == LimitMode::eta_delta ? PatternKind::limit_eta_delta : PatternKind::limit_eta;
  out.pattern.meta.alpha = spec.alpha;
  out.pattern.meta.q = spec.q;
  out.pattern.meta.delta = spec.delta;
  out.pattern.meta.truncation_bound = spec.truncation_bound;
  out.pattern.meta.bound_level = spec.bound_level;

  const double floor = spec.window.mark_floor;
  const bool never_rises = spec.g.upper_bound() <= 1.0;
  std::vector<ClusterStack> stacks;
  stacks.reserve(n_seeds);
  for (std::uint64_t k = 0; k < n_seeds; ++k) {
    ClusterStack st;
    st.time = spec.window.s_max * rng.uniform();
    st.seed_mark = std::pow(top + rng.uniform_open0() * mass, -1.0 / a);
    double mark = st.seed_mark;
    for (std::size_t j = 0;; ++j) {
      if (mark > floor) st.marks.push_back(mark);
      if (j >= spec.limits.horizon) break;
      if (never_rises ? mark <= floor : mark < floor * spec.limits.kill_epsilon) break;
      const double xi = spec.g.sample(rng);
      if (xi == 0.0) {
        st.died = true;
        break;
      }
      mark *= xi;
    }
    if (!st.marks.empty()) stacks.push_back(std::move(st));
  }
  std::sort(stacks.begin(), stacks.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
  for (std::size_t k = 0; k < stacks.size(); ++k) {
    for (double m : stacks[k].marks) out.pattern.points.push_back({stacks[k].time, m, static_cast<std::int64_t>(k)});
  }
  out.stacks = std::move(stacks);
  return out;
}

LimitSpec prepare_eta_approx(double alpha, double q, const TailDistribution& g, Window window, double a,
                             const ProductMeasure& sup, bool moment_certified, double target) {
  return prepare_eta_approx(alpha, q, g, window, a, [&](double u) { return sup.tail_moment(u); }, moment_certified,
                            target);
}

LimitSpec prepare_eta_approx(double alpha, double q, const TailDistribution& g, Window window, double a,
                             const TailMoment& sup_tail, bool moment_certified, double target) {
  const DeltaChoice d = auto_delta(sup_tail, alpha, moment_certified, window.s_max, q, a, target);
  LimitSpec spec;
  spec.alpha = alpha;
  spec.q = q;
  spec.g = g;
  spec.delta = d.delta;
  window.mark_floor = std::min(window.mark_floor, d.delta / 2.0);
  spec.window = window;
  spec.mode = LimitMode::eta_approx;
  spec.truncation_bound = d.bound;
  spec.bound_level = a;
  return spec;
}

std::size_t box_count(const PointPattern& pattern, double s, double a) {
  if (a < pattern.window.mark_floor) {
    throw InvalidArgument("box_count: level " + std::to_string(a) + " lies below the mark floor " +
                          std::to_string(pattern.window.mark_floor) + " (region undercounted)");
  }
  require(s >= 0.0, "box_count: s must be >= 0");
  if (s > pattern.window.s_max) throw InvalidArgument("box_count: s exceeds the window's s_max");
  std::size_t k = 0;
  for (const auto& p : pattern.points) {
    if (p.time > s) break;
    if (p.mark > a) ++k;
  }
  return k;
}

ClusterSizes cluster_size_distribution(const PointPattern& pattern, double a, double gap) {
  if (a < pattern.window.mark_floor) throw InvalidArgument("cluster_size_distribution: level below the mark floor");
  require(gap >= 0.0, "cluster_size_distribution: gap must be >= 0");
  std::vector<std::size_t> sizes;
  if (pattern.kind == PatternKind::empirical_Nn) {
    std::size_t current = 0;
    double last_time = 0.0;
    for (const auto& p : pattern.points) {
      if (p.mark <= a) continue;
      if (current > 0 && p.time - last_time < gap) {
        ++current;
      } else {
        if (current > 0) sizes.push_back(current);
        current = 1;
      }
      last_time = p.time;
    }
    if (current > 0) sizes.push_back(current);
  } else {
    std::map<std::int64_t, std::size_t> per_stack;
    for (const auto& p : pattern.points) {
      if (p.mark > a) ++per_stack[p.stack_id];
    }
    for (const auto& [id, k] : per_stack) sizes.push_back(k);
  }
  ClusterSizes out;
  double total = 0.0;
  for (std::size_t k : sizes) {
    if (out.histogram.size() <= k) out.histogram.resize(k + 1, 0);
    ++out.histogram[k];
    total += static_cast<double>(k);
  }
  out.clusters = sizes.size();
  out.mean = sizes.empty() ? 0.0 : total / static_cast<double>(sizes.size());
  return out;
}

namespace {

std::vector<std::uint64_t> count_histogram(const std::vector<PointPattern>& reps, const Box& box, double& mean) {
  std::vector<std::uint64_t> h;
  double total = 0.0;
  for (const auto& p : reps) {
    const std::size_t k = box_count(p, box.s, box.a);
    if (h.size() <= k) h.resize(k + 1, 0);
    ++h[k];
    total += static_cast<double>(k);
  }
  mean = total / static_cast<double>(reps.size());
  return h;
}

}  // namespace

ComparisonReport compare_patterns(const std::vector<PointPattern>& empirical, const std::vector<PointPattern>& limit,
                                  const std::vector<Box>& boxes, double level, std::size_t min_reps) {
  require(empirical.size() >= min_reps && limit.size() >= min_reps,
          "compare_patterns: need at least " + std::to_string(min_reps) + " replicates on each side");
  require(!boxes.empty(), "compare_patterns: no boxes");
  require(level > 0.0 && level < 1.0, "compare_patterns: level must lie in (0, 1)");
  ComparisonReport report;
  report.level = level;
  std::size_t compared = 0;
  for (const auto& box : boxes) {
    BoxComparison row;
    row.box = box;
    auto he = count_histogram(empirical, box, row.mean_empirical);
    auto hl = count_histogram(limit, box, row.mean_limit);
    if (row.mean_empirical == 0.0 && row.mean_limit == 0.0) {
      row.skipped = true;
      row.note = "zero counts on both sides";
    } else {
      const std::size_t width = std::max(he.size(), hl.size());
      he.resize(width, 0);
      hl.resize(width, 0);
      const ChiSquareResult r = chi_square_two_sample(he, hl);
      row.statistic = r.statistic;
      row.df = r.df;
      row.p_value = r.p_value;
      if (r.df == 0) {
        row.skipped = true;
        row.note = "all mass in one pooled bin";
      } else {
        ++compared;
      }
    }
    report.rows.push_back(std::move(row));
  }
  report.bonferroni_level = compared > 0 ? level / static_cast<double>(compared) : level;
  for (const auto& row : report.rows) {
    if (!row.skipped && row.p_value < report.bonferroni_level) report.consistent = false;
  }
  return report;
}

}  // namespace exlab
