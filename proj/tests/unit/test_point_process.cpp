#include <doctest.h>

#include <cmath>
#include <vector>

#include "exlab/builtins.hpp"
#include "exlab/error.hpp"
#include "exlab/point_process.hpp"
#include "exlab/stats.hpp"
#include "support/reference.hpp"

using namespace exlab;

namespace {

ChainPath make_path(std::vector<double> xs, double a_max) {
  ChainPath p;
  for (double x : xs) p.atom_flags.push_back(x <= a_max ? 1 : 0);
  p.states = std::move(xs);
  return p;
}

LimitSpec spec_for(TailDistribution g, double q, double delta, double s_max = 1.0) {
  LimitSpec s;
  s.alpha = 1.0;
  s.q = q;
  s.g = std::move(g);
  s.delta = delta;
  s.window = {s_max, delta};
  return s;
}

}  // namespace

TEST_CASE("build_Nn: hand example") {
  const ChainPath p = make_path({0.0, 3.0, 0.0, 5.0, 0.0}, 0.5);
  const PointPattern pat = build_Nn(p, 2, 1.0, {1.0, 1.0});
  REQUIRE(pat.points.size() == 1);
  CHECK(pat.points[0].time == 0.5);
  CHECK(pat.points[0].mark == 3.0);
  CHECK(pat.kind == PatternKind::empirical_Nn);
  CHECK(pat.meta.b_n == 1.0);

  const PointPattern wider = build_Nn(p, 2, 1.0, {2.0, 1.0});
  CHECK(wider.points.size() == 2);
  CHECK(wider.points[1].time == 1.5);
  CHECK_THROWS_AS(build_Nn(p, 3, 1.0, {2.0, 1.0}), InvalidArgument);
}

TEST_CASE("build_Nn: box counts agree with a direct count on the path") {
  Rng rng(21);
  const KernelSpec k = builtin_kernel("ar1");
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 500 + rng.below(500);
    const ChainPath path = simulate_path(k, InitialState::from_h(), 2 * n, rng);
    const double b_n = static_cast<double>(n) / 10.0;
    const PointPattern pat = build_Nn(path, n, b_n, {2.0, 0.5});
    for (double s : {0.0, 0.3, 1.0, 1.7, 2.0}) {
      for (double a : {0.5, 1.0, 2.0, 8.0}) {
        CHECK(box_count(pat, s, a) == ref::path_box_count(path.states, n, b_n, s, a));
      }
    }
  }
}

TEST_CASE("build_Nn_restricted keeps whole cycles that start high") {
  // cycles: [5 0.2] [0.3] [1 0.1] [8 4 0.3]
  const ChainPath p = make_path({5, 0.2, 0.3, 1, 0.1, 8, 4, 0.3}, 0.5);
  const PointPattern pat = build_Nn_restricted(p, 7, 1.0, {1.0, 0.5}, 2.0);
  REQUIRE(pat.points.size() == 3);
  CHECK(pat.points[0].mark == 5.0);
  CHECK(pat.points[1].mark == 8.0);
  CHECK(pat.points[2].mark == 4.0);
  CHECK(pat.meta.delta == 2.0);
}

TEST_CASE("box_count and cluster sizes refuse levels below the floor") {
  const PointPattern pat = build_Nn(make_path({0, 3, 0}, 0.5), 2, 1.0, {1.0, 1.0});
  CHECK_THROWS_AS(box_count(pat, 1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(box_count(pat, 1.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(cluster_size_distribution(pat, 0.5), InvalidArgument);
}

TEST_CASE("empirical cluster sizes by time gap") {
  PointPattern pat;
  pat.window = {1.0, 1.0};
  for (double t : {0.10, 0.11, 0.12, 0.50, 0.90, 0.905}) pat.points.push_back({t, 2.0, -1});
  const ClusterSizes one = cluster_size_distribution(pat, 1.0, 0.0);
  CHECK(one.clusters == 6);
  const ClusterSizes grouped = cluster_size_distribution(pat, 1.0, 0.02);
  CHECK(grouped.clusters == 3);
  CHECK(grouped.histogram == std::vector<std::size_t>{0, 1, 1, 1});
  CHECK(grouped.mean == doctest::Approx(2.0));
}

TEST_CASE("limit sampler argument checks") {
  LimitSpec s = spec_for(TailDistribution::point(0.0), 2.0, 0.0);
  Rng rng(22);
  CHECK_THROWS_AS(sample_limit(s, rng), InvalidArgument);
  s.delta = 0.5;
  s.mode = LimitMode::eta_approx;
  CHECK_THROWS_AS(sample_limit(s, rng), InvalidArgument);
}

TEST_CASE("G = delta_0: Poisson seeds with single-point stacks") {
  const LimitSpec s = spec_for(TailDistribution::point(0.0), 2.0, 0.5);
  Rng rng(23);
  RunningStats seeds;
  RunningStats in_box;
  for (int rep = 0; rep < 20000; ++rep) {
    Rng local = rng.split(static_cast<std::uint64_t>(rep));
    const LimitSample ls = sample_limit(s, local);
    seeds.add(static_cast<double>(ls.stacks.size()));
    for (const auto& st : ls.stacks) {
      REQUIRE(st.marks.size() == 1);
      REQUIRE(st.died);
      REQUIRE(st.marks[0] > 0.5);
    }
    for (std::size_t i = 1; i < ls.pattern.points.size(); ++i) {
      REQUIRE(ls.pattern.points[i - 1].time <= ls.pattern.points[i].time);
    }
    in_box.add(static_cast<double>(box_count(ls.pattern, 0.5, 2.0)));
  }
  // (s_max/q) delta^{-alpha} = 1; the box [0, 0.5] x (2, inf] has mean 0.5 * 0.5 * 0.5.
  CHECK(std::abs(seeds.mean() - 1.0) < 4.0 * seeds.se());
  CHECK(seeds.variance() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(in_box.mean() - 0.125) < 4.0 * in_box.se());
}

TEST_CASE("G = delta_0.5: stacks halve down to the floor") {
  const LimitSpec s = spec_for(TailDistribution::point(0.5), 2.0, 0.25);
  Rng rng(24);
  for (int rep = 0; rep < 2000; ++rep) {
    const LimitSample ls = sample_limit(s, rng);
    for (const auto& st : ls.stacks) {
      REQUIRE(st.marks[0] == st.seed_mark);
      for (std::size_t i = 1; i < st.marks.size(); ++i) REQUIRE(st.marks[i] == st.marks[i - 1] * 0.5);
      REQUIRE(st.marks.back() * 0.5 <= 0.25);
      REQUIRE_FALSE(st.died);
    }
  }
}

TEST_CASE("G = delta_0.5: a seed at 4 gives marks 4, 2, 1 above 0.75") {
  // Seeds restricted to (3.99, 4] and floor 0.75.
  LimitSpec s = spec_for(TailDistribution::point(0.5), 1.0, 3.99);
  s.seed_upper = 4.0;
  s.window.mark_floor = 0.75;
  s.window.s_max = 10000.0;
  Rng rng(25);
  const LimitSample ls = sample_limit(s, rng);
  REQUIRE(!ls.stacks.empty());
  for (const auto& st : ls.stacks) {
    REQUIRE(st.marks.size() == 3);
    CHECK(st.marks[2] == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("xi in {0, 1}: stack sizes are geometric") {
  const LimitSpec s = spec_for(TailDistribution::mixture(0.5, TailDistribution::point(1.0)), 1.0, 1.0);
  Rng rng(26);
  std::vector<std::uint64_t> hist(40, 0);
  std::size_t total = 0;
  while (total < 20000) {
    const LimitSample ls = sample_limit(s, rng);
    for (const auto& st : ls.stacks) {
      REQUIRE(st.died);
      ++hist[std::min<std::size_t>(st.marks.size() - 1, 39)];
      ++total;
    }
  }
  std::vector<double> probs(40);
  for (std::size_t k = 0; k < 39; ++k) probs[k] = std::pow(0.5, static_cast<double>(k + 1));
  probs[39] = std::pow(0.5, 39.0);
  CHECK(chi_square_gof(hist, probs).p_value > 1e-3);
}

TEST_CASE("limit pattern: mark scaling and time homogeneity") {
  // G = 0.7: clusters do not change the seed count above a, so box means are
  // (s/q) a^{-alpha} E[#marks > a per seed], computed exactly here.
  const double q = 1.5;
  const LimitSpec s = spec_for(TailDistribution::point(0.7), q, 0.5, 2.0);
  auto expected = [&](double box_s, double a) {
    // sum over j of nu_alpha(a / 0.7^j, inf) = a^{-1} sum 0.7^j.
    return box_s / q * (1.0 / a) * (1.0 / (1.0 - 0.7));
  };
  Rng rng(27);
  const std::vector<Box> boxes{{1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}, {0.5, 4.0}};
  std::vector<RunningStats> counts(boxes.size());
  for (int rep = 0; rep < 20000; ++rep) {
    const LimitSample ls = sample_limit(s, rng);
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      counts[b].add(static_cast<double>(box_count(ls.pattern, boxes[b].s, boxes[b].a)));
    }
  }
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    CAPTURE(b);
    CHECK(std::abs(counts[b].mean() - expected(boxes[b].s, boxes[b].a)) < 4.0 * counts[b].se());
  }
}

TEST_CASE("compare_patterns: null holds, wrong q is rejected") {
  Rng rng(28);
  const LimitSpec s = spec_for(TailDistribution::point(0.5), 2.0, 0.5);
  LimitSpec wrong = s;
  wrong.q = 1.0;
  std::vector<PointPattern> a, b, c;
  for (int rep = 0; rep < 3000; ++rep) {
    a.push_back(sample_limit(s, rng).pattern);
    b.push_back(sample_limit(s, rng).pattern);
    c.push_back(sample_limit(wrong, rng).pattern);
  }
  const std::vector<Box> boxes{{1.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {1.0, 1e6}};
  const ComparisonReport null = compare_patterns(a, b, boxes);
  CHECK(null.consistent);
  CHECK(null.rows.back().skipped);
  CHECK(null.bonferroni_level == doctest::Approx(0.01 / 3.0));
  CHECK_FALSE(compare_patterns(a, c, boxes).consistent);
  CHECK_THROWS_AS(compare_patterns(std::vector<PointPattern>(a.begin(), a.begin() + 10), b, boxes), InvalidArgument);
}

TEST_CASE("prepare_eta_approx picks delta from the truncation bound") {
  const ProductMeasure sup = ProductMeasure::deterministic(1.0, 0.5);
  const LimitSpec s = prepare_eta_approx(1.0, 2.0, TailDistribution::point(0.5), {1.0, 1.0}, 1.0, sup, true);
  CHECK(s.delta == 1.0);
  CHECK(*s.truncation_bound == 0.0);
  CHECK(s.window.mark_floor == 0.5);
  CHECK(s.mode == LimitMode::eta_approx);
  Rng rng(29);
  const LimitSample ls = sample_limit(s, rng);
  CHECK(ls.pattern.kind == PatternKind::limit_eta);
  CHECK(ls.pattern.meta.bound_level == 1.0);
}
