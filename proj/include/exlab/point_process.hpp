#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exlab/distribution.hpp"
#include "exlab/kernel.hpp"
#include "exlab/measure_oracle.hpp"
#include "exlab/random.hpp"
#include "exlab/tail_chain.hpp"

namespace exlab {

enum class PatternKind { empirical_Nn, limit_eta_delta, limit_eta };

std::string_view to_string(PatternKind k);

/// [0, s_max] x (mark_floor, inf].
struct Window {
  double s_max = 1.0;
  double mark_floor = 1.0;
};

struct Point {
  double time = 0.0;
  double mark = 0.0;
  std::int64_t stack_id = -1;  // -1 for empirical points
};

struct PatternMeta {
  std::size_t n = 0;
  double b_n = 0.0;
  double alpha = 0.0;
  double q = 0.0;
  double delta = 0.0;
  std::optional<double> truncation_bound;  // eta_approx only
  std::optional<double> bound_level;       // level a the bound refers to
};

/// Finite point pattern on the window, sorted by time.
struct PointPattern {
  std::vector<Point> points;
  Window window;
  PatternKind kind = PatternKind::empirical_Nn;
  PatternMeta meta;
};

/// Marks i_k xi_k(j) above the window floor, all at one time q t_k.
/// marks[0] is the seed mark whenever the seed lies above the floor.
struct ClusterStack {
  double time = 0.0;
  double seed_mark = 0.0;
  std::vector<double> marks;
  bool died = false;  // xi_k hit 0 (tau* reached) rather than falling below the floor
};

/// Points (j/n, X_j/b_n), 0 <= j <= s_max n, with X_j/b_n > mark_floor.
/// Throws InvalidArgument when the path is shorter than s_max n.
PointPattern build_Nn(const ChainPath& path, std::size_t n, double b_n, const Window& window);

/// The same, keeping only points in cycles whose first state is >= delta b_n.
PointPattern build_Nn_restricted(const ChainPath& path, std::size_t n, double b_n, const Window& window,
                                 double delta);

enum class LimitMode { eta_delta, eta_approx };

struct LimitSpec {
  double alpha = 1.0;
  double q = 1.0;
  TailDistribution g = TailDistribution::point(0.0);
  Window window;
  double delta = 1.0;
  /// Seeds are drawn from nu_alpha on (delta, seed_upper].
  double seed_upper = std::numeric_limits<double>::infinity();
  LimitMode mode = LimitMode::eta_delta;
  /// A stack ends when xi(j) = 0, at the horizon, or once its mark falls
  /// below mark_floor * kill_epsilon (immediately below the floor when xi <= 1).
  TailChainLimits limits{100'000, 1e-6, 0};
  /// eta_approx: truncation bound at `bound_level`, copied into the meta.
  std::optional<double> truncation_bound;
  std::optional<double> bound_level;
};

struct LimitSample {
  PointPattern pattern;
  std::vector<ClusterStack> stacks;
};

/// Poisson((s_max/q)(delta^{-alpha} - seed_upper^{-alpha})) seeds at uniform
/// times on [0, s_max] with marks from nu_alpha on (delta, seed_upper], each
/// compounded by an independent tail-chain run.
LimitSample sample_limit(const LimitSpec& spec, Rng& rng);

/// eta_approx spec at analysis level `a`: delta is halved from `a` until the
/// truncation bound is below `target`.
LimitSpec prepare_eta_approx(double alpha, double q, const TailDistribution& g, Window window, double a,
                             const ProductMeasure& sup, bool moment_certified, double target = 1e-3);
LimitSpec prepare_eta_approx(double alpha, double q, const TailDistribution& g, Window window, double a,
                             const TailMoment& sup_tail, bool moment_certified, double target = 1e-3);

/// Number of points in [0, s] x (a, inf]. Throws InvalidArgument when
/// a < mark_floor or s > s_max.
std::size_t box_count(const PointPattern& pattern, double s, double a);

struct ClusterSizes {
  std::vector<std::size_t> histogram;  // histogram[k] = clusters of size k (k >= 1)
  std::size_t clusters = 0;
  double mean = 0.0;
};

/// Limit patterns: marks > a per stack. Empirical patterns: exceedances of a
/// closer than `gap` in time share a cluster.
ClusterSizes cluster_size_distribution(const PointPattern& pattern, double a, double gap = 0.0);

struct Box {
  double s = 1.0;
  double a = 1.0;
};

struct BoxComparison {
  Box box;
  double mean_empirical = 0.0;
  double mean_limit = 0.0;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool skipped = false;
  std::string note;
};

struct ComparisonReport {
  std::vector<BoxComparison> rows;
  double level = 0.01;            // overall level
  double bonferroni_level = 0.0;  // level / number of compared boxes
  bool consistent = true;
};

/// Per-box two-sample chi-square on count histograms with a Bonferroni
/// verdict at overall `level`. Each side needs at least `min_reps` patterns.
ComparisonReport compare_patterns(const std::vector<PointPattern>& empirical, const std::vector<PointPattern>& limit,
                                  const std::vector<Box>& boxes, double level = 0.01, std::size_t min_reps = 500);

}  // namespace exlab
