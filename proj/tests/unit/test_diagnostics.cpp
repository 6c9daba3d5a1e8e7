#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "exlab/builtins.hpp"
#include "exlab/diagnostics.hpp"

using namespace exlab;

namespace {

DiagnosticOptions quick() {
  DiagnosticOptions o;
  o.t_grid = {1e2, 1e3};
  o.m_grid = {1, 2, 4, 8};
  o.n_reps = 2000;
  o.joint_reps = 20000;
  return o;
}

bool has(const std::vector<ConditionReport>& rs, ConditionId id) {
  return std::any_of(rs.begin(), rs.end(), [&](const auto& r) { return r.id == id; });
}

}  // namespace

TEST_CASE("names") {
  CHECK(to_string(ConditionId::drift_back) == "drift_back");
  CHECK(to_string(ConditionId::joint_rv_full) == "joint_rv_full");
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("small starts tend to zero") {
  const auto starts = default_small_starts(builtin_kernel("det-contract"));
  REQUIRE(starts.size() == 3);
  for (const auto& s : starts) CHECK(s.u(1e8) < s.u(1e2));
}

TEST_CASE("drift back: contraction passes, unit multiplier fails") {
  const DiagnosticOptions o = quick();
  Rng rng(41);
  const KernelSpec good = builtin_kernel("det-contract");
  const ConditionReport r = check_drift_back(good, ScalingFunction::analytic(good.h_return), o, rng);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.estimates.size() == o.t_grid.size() * o.m_grid.size());

  const KernelSpec bad = builtin_kernel("const-fail");
  const ConditionReport f = check_drift_back(bad, ScalingFunction::analytic(bad.h_return), o, rng);
  CHECK(f.verdict == Verdict::fail);
  CHECK_FALSE(f.rationale.empty());
}

TEST_CASE("uniform moment condition") {
  const DiagnosticOptions o = quick();
  Rng rng(42);
  const KernelSpec good = builtin_kernel("det-contract");
  const ScalingFunction b = ScalingFunction::analytic(good.h_return);
  const ConditionReport r = check_moment_uniform(good, b, o, rng);
  CHECK(r.verdict == Verdict::pass);
  for (const auto& e : r.estimates) CHECK(e.t_scaled);

  const KernelSpec bad = builtin_kernel("const-fail");
  CHECK(check_moment_uniform(bad, ScalingFunction::analytic(bad.h_return), o, rng).verdict == Verdict::fail);
}

TEST_CASE("within-cycle exceedances vanish for a monotone contraction") {
  const DiagnosticOptions o = quick();
  Rng rng(43);
  const KernelSpec k = builtin_kernel("det-contract");
  const WithinCycleReports r = check_within_cycle(k, ScalingFunction::analytic(k.h_return), o, rng);
  CHECK(r.conditional.verdict == Verdict::pass);
  CHECK(r.t_scaled.verdict == Verdict::pass);
  for (const auto& e : r.conditional.estimates) CHECK(e.estimate.value == 0.0);
}

TEST_CASE("drift away from large starts, G({0}) = 0") {
  const DiagnosticOptions o = quick();
  Rng rng(44);
  CHECK(check_drift_away_z(builtin_kernel("det-contract"), o, rng).verdict == Verdict::pass);
  CHECK(check_drift_away_z(builtin_kernel("const-fail"), o, rng).verdict == Verdict::fail);
}

TEST_CASE("cycle regularity and tightness, G({0}) > 0") {
  DiagnosticOptions o = quick();
  o.m_grid = {1, 4, 16, 32};  // P[tau_A > m] = 0.7^m
  Rng rng(45);
  const KernelSpec k = builtin_kernel("geo-kill");
  const auto starts = default_small_starts(k);
  CHECK(check_cycle_regularity(k, starts, o, rng).verdict == Verdict::pass);
  CHECK(check_tau_tightness(k, starts, o, rng).verdict == Verdict::pass);
}

TEST_CASE("regularity of the kernel at small starts") {
  DiagnosticOptions o = quick();
  o.t_grid = {1e2, 1e3, 1e4};  // from the atom, P[H > t eta] = 1/(t eta)
  Rng rng(46);
  const KernelSpec k = builtin_kernel("ar1");
  const ConditionReport r = check_regularity_kernel(k, default_small_starts(k), o, rng);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.estimates.size() == 3 * o.t_grid.size() * o.eta_grid.size());
}

TEST_CASE("joint regular variation matches the tail measure") {
  const DiagnosticOptions o = quick();
  Rng rng(47);
  const KernelSpec k = builtin_kernel("geo-kill");
  const ConditionReport r = check_joint_rv_full(k, ScalingFunction::analytic(k.h_return), o, rng);
  CHECK(r.verdict == Verdict::pass);
  for (const auto& e : r.estimates) CHECK(e.reference.has_value());
  CHECK_FALSE(default_cylinders(2).empty());
}

TEST_CASE("run_diagnostics selects checkers by G({0})") {
  DiagnosticOptions o = quick();
  o.t_grid = {1e2};
  o.n_reps = 500;
  o.joint_reps = 2000;
  Rng rng(48);
  const KernelSpec dc = builtin_kernel("det-contract");
  const auto a = run_diagnostics(dc, ScalingFunction::analytic(dc.h_return), o, rng);
  CHECK(has(a, ConditionId::drift_away_z));
  CHECK_FALSE(has(a, ConditionId::cycle_regularity));
  const KernelSpec gk = builtin_kernel("geo-kill");
  const auto b = run_diagnostics(gk, ScalingFunction::analytic(gk.h_return), o, rng);
  CHECK(has(b, ConditionId::cycle_regularity));
  CHECK_FALSE(has(b, ConditionId::drift_away_z));
}

TEST_CASE("m0_prime applies to the tau_A horizon only") {
  DiagnosticOptions o = quick();
  const KernelSpec k = builtin_kernel("geo-kill");
  const ScalingFunction b = ScalingFunction::analytic(k.h_return);
  Rng r1(45), r2(45), r3(45);
  const ConditionReport base = check_moment_uniform(k, b, o, r1, MomentHorizon::cycle);
  o.m0_prime = 3;
  const ConditionReport later = check_moment_uniform(k, b, o, r2, MomentHorizon::cycle);
  const ConditionReport extremal = check_moment_uniform(k, b, o, r3, MomentHorizon::extremal_component);
  REQUIRE(base.estimates.size() == later.estimates.size());
  for (std::size_t i = 0; i < base.estimates.size(); ++i) {
    CHECK(base.estimates[i].m == 1.0);
    CHECK(later.estimates[i].m == 3.0);
    // Common random numbers: a later start can only lose exceedances.
    CHECK(later.estimates[i].estimate.value <= base.estimates[i].estimate.value);
  }
  for (const auto& e : extremal.estimates) CHECK(e.m == 1.0);
}
