#include <doctest.h>

#include <cmath>
#include <vector>

#include "exlab/error.hpp"
#include "exlab/tail_chain.hpp"

using namespace exlab;

TEST_CASE("simulate_tail_chain: absorption and geometric decay") {
  Rng rng(1);
  const TailChainPath dead = simulate_tail_chain(TailDistribution::point(0.0), 1.0, 100, 1e-12, rng);
  CHECK(dead.xi == std::vector<double>{0.0});
  CHECK(dead.products == std::vector<double>{0.0});
  CHECK(dead.death_time.value() == 1);
  CHECK(dead.product(5) == 0.0);

  const TailChainPath half = simulate_tail_chain(TailDistribution::point(0.5), 1.0, 4, 1e-12, rng);
  CHECK(half.products == std::vector<double>{0.5, 0.25, 0.125, 0.0625});
  CHECK(half.truncated);
  CHECK_FALSE(half.death_time.has_value());
  CHECK(half.product(0) == 1.0);
  const TailChainPath scaled = simulate_tail_chain(TailDistribution::point(0.5), 3.0, 2, 1e-12, rng);
  CHECK(scaled.value(2) == 0.75);
}

TEST_CASE("death time is geometric for a mixture with an atom at 0") {
  Rng rng(2);
  const auto g = TailDistribution::mixture(0.3, TailDistribution::point(2.0));
  RunningStats deaths;
  for (int i = 0; i < 100000; ++i) {
    const TailChainPath p = simulate_tail_chain(g, 1.0, 100000, 1e-300, rng);
    REQUIRE(p.death_time.has_value());
    deaths.add(static_cast<double>(*p.death_time));
  }
  CHECK(std::abs(deaths.mean() - 1.0 / 0.3) < 3.0 * deaths.se());
}

TEST_CASE("transience verdicts") {
  Rng rng(3);
  CHECK(check_transience(TailDistribution::mixture(0.3, TailDistribution::point(1.0)), 1.0, 1000, rng).verdict ==
        Transience::transient_by_atom);
  CHECK(check_transience(TailDistribution::point(0.5), 1.0, 1000, rng).verdict == Transience::transient_by_drift);
  CHECK(check_transience(TailDistribution::point(1.0), 1.0, 1000, rng).verdict == Transience::not_transient);
  CHECK(check_transience(TailDistribution::lognormal(-0.5, 0.5), 2.0, 1000, rng).verdict ==
        Transience::transient_by_drift);
  const auto table = TailDistribution::table({0.5, 2.0}, {0.5, 0.5});
  // E log xi = 0 exactly: the walk oscillates.
  CHECK(check_transience(table, 1.0, 1000, rng).verdict == Transience::not_transient);
}

TEST_CASE("sup statistics: deterministic G") {
  Rng rng(4);
  const SupStatistics s = sup_statistics(TailDistribution::point(0.5), 1.0, {}, 1000, rng);
  CHECK(s.p_sup_le_1.value == 1.0);
  CHECK(s.e_sup_alpha.value == 0.5);
  CHECK(s.e_sup_alpha_above_1.value == 0.0);
  CHECK(s.c.value == 1.0);
  CHECK(s.horizon_doubling_agrees);
  const SupStatistics z = sup_statistics(TailDistribution::point(0.0), 1.0, {}, 1000, rng);
  CHECK(z.p_sup_le_1.value == 1.0);
  CHECK(z.e_sup_alpha.value == 0.0);
}

TEST_CASE("sup statistics refuse a non-transient tail chain") {
  Rng rng(5);
  try {
    (void)constant_c(TailDistribution::point(2.0), 1.0, {}, 1000, rng);
    FAIL("expected an error");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()).find("transience check failed") != std::string::npos);
  }
  CHECK_THROWS_AS(sup_statistics(TailDistribution::point(2.0), 1.0, {}, 100, rng), EstimationError);
}

TEST_CASE("sup statistics: lognormal against a long-horizon reference") {
  // The reference runs a separate stream to a fixed horizon of 400 steps with
  // no kill level; with E log xi = -0.5 the product is below e^{-150} by then.
  const auto g = TailDistribution::lognormal(-0.5, 0.5);
  Rng rng(6);
  const SupStatistics s = sup_statistics(g, 2.0, {}, 100000, rng);
  // E xi^4 = 1, so no second moment certificate for S^2: bootstrap intervals.
  CHECK_FALSE(s.normal_ci);
  CHECK(s.horizon_doubling_agrees);
  Rng ref(600);
  RunningStats e_sup, p_le;
  for (int i = 0; i < 50000; ++i) {
    double p = 1.0, sup = 0.0;
    for (int n = 0; n < 400; ++n) {
      p *= g.sample(ref);
      sup = std::max(sup, p);
    }
    e_sup.add(sup * sup);
    p_le.add(sup <= 1.0 ? 1.0 : 0.0);
  }
  const double z = 3.3;
  CHECK(std::abs(s.e_sup_alpha.value - e_sup.mean()) < z * std::hypot(s.e_sup_alpha.se, e_sup.se()));
  CHECK(std::abs(s.p_sup_le_1.value - p_le.mean()) < z * std::hypot(s.p_sup_le_1.se, p_le.se()));
}

TEST_CASE("constant c: closed forms and bounds") {
  Rng rng(7);
  for (double alpha : {0.5, 1.0, 3.0}) {
    const LimitConstants c = constant_c(TailDistribution::point(0.5), alpha, {}, 1000, rng);
    CHECK(c.c.value == 1.0);
    CHECK(c.provenance.kind == Provenance::Kind::analytic);
  }
  const LimitConstants zero = constant_c(TailDistribution::point(0.0), 1.0, {}, 1000, rng);
  CHECK(zero.c.value == 1.0);
  CHECK(zero.theta_stationary->value == 1.0);

  const LimitConstants m = constant_c(TailDistribution::lognormal(-0.5, 0.5), 2.0, {}, 50000, rng);
  CHECK(m.p_sup_le_1.value <= m.c.value);
  CHECK(m.c.value >= m.theta_stationary->value);
  CHECK(m.theta_stationary->value >= 0.0);
  CHECK(m.e_xi_alpha.value <= 1.0);
}

TEST_CASE("extremal index formulas") {
  Rng rng(8);
  LimitConstants c = constant_c(TailDistribution::point(0.5), 1.0, {}, 1000, rng);
  CHECK(c.theta_stationary->value == 0.5);
  c.q = Estimate{3.0, 0.0, 3.0, 3.0, 0};
  fill_extremal_index(c);
  CHECK(c.theta_regenerative->value == doctest::Approx(0.25));

  LimitConstants d = constant_c(TailDistribution::point(0.7), 2.0, {}, 1000, rng);
  CHECK(d.theta_stationary->value == doctest::Approx(0.51).epsilon(1e-15));

  LimitConstants bad = d;
  bad.q = Estimate{1.0, 0.0, 1.0, 1.0, 0};
  CHECK_THROWS_AS(extremal_index(bad), InvalidArgument);
  bad.q.reset();
  CHECK_THROWS_AS(extremal_index(bad), InvalidArgument);
}

TEST_CASE("geo-kill tail chain: c = 1 and E sup^alpha = 1 - p0") {
  Rng rng(9);
  const auto g = TailDistribution::mixture(0.3, TailDistribution::point(1.0));
  const LimitConstants c = constant_c(g, 1.0, {}, 100000, rng);
  CHECK(c.c.value == 1.0);
  CHECK(c.e_sup_alpha.lo <= 0.7);
  CHECK(c.e_sup_alpha.hi >= 0.7);
}

TEST_CASE("monotone decoupling and moment consistency") {
  Rng rng(10);
  const auto g = TailDistribution::lognormal(-0.5, 0.5);
  const auto est = tail_sup_exceedance(g, {1, 2, 4, 8, 16, 32}, 0.5, {}, 20000, rng);
  for (std::size_t k = 1; k < est.size(); ++k) CHECK(est[k].value <= est[k - 1].value);
  CHECK(est.back().value < 0.01);

  const double m = g.moment(2.0);
  for (int j = 1; j <= 3; ++j) {
    RunningStats s;
    for (int i = 0; i < 200000; ++i) {
      double p = 1.0;
      for (int k = 0; k < j; ++k) p *= g.sample(rng);
      s.add(p * p);
    }
    CHECK(std::abs(s.mean() - std::pow(m, j)) < 3.3 * s.se());
  }
}

TEST_CASE("sup moment certification") {
  CHECK(sup_moment_certified(TailDistribution::point(0.5), 1.0));
  CHECK(sup_moment_certified(TailDistribution::mixture(0.3, TailDistribution::point(1.0)), 1.0));
  CHECK(sup_moment_certified(TailDistribution::lognormal(-0.5, 0.5), 2.0));
  CHECK_FALSE(sup_moment_certified(TailDistribution::point(1.5), 1.0));
}

TEST_CASE("cramer exponent") {
  // E xi^k = exp(k mu + k^2 sigma^2 / 2) = 1 at k = -2 mu / sigma^2.
  CHECK(*cramer_exponent(TailDistribution::lognormal(-0.5, 0.5)) == doctest::Approx(4.0).epsilon(1e-9));

  // 0.9 * 0.5^k + 0.1 * 4^k = 1, root by plain bisection on [0.1, 10].
  auto f = [](double k) { return 0.9 * std::pow(0.5, k) + 0.1 * std::pow(4.0, k) - 1.0; };
  double lo = 0.1, hi = 10.0;
  for (int i = 0; i < 100; ++i) (f(0.5 * (lo + hi)) < 0.0 ? lo : hi) = 0.5 * (lo + hi);
  CHECK(*cramer_exponent(TailDistribution::table({0.5, 4.0}, {0.9, 0.1})) == doctest::Approx(lo).epsilon(1e-9));

  CHECK_FALSE(cramer_exponent(TailDistribution::point(0.5)));
  CHECK_FALSE(cramer_exponent(TailDistribution::lognormal(0.1, 0.5)));
  CHECK_FALSE(cramer_exponent(TailDistribution::mixture(0.3, TailDistribution::point(1.0))));
}

TEST_CASE("size-biased laws") {
  const auto ln = *TailDistribution::lognormal(-0.5, 0.5).size_biased(4.0);
  CHECK(ln.mean_log() == doctest::Approx(0.5));
  const auto pa = *TailDistribution::pareto(3.0, 1.0).size_biased(1.0);
  CHECK(pa.moment(1.0) == doctest::Approx(TailDistribution::pareto(3.0, 1.0).moment(2.0) /
                                          TailDistribution::pareto(3.0, 1.0).moment(1.0)));
  CHECK_FALSE(TailDistribution::pareto(3.0, 1.0).size_biased(3.0));
  const auto tb = *TailDistribution::table({0.5, 4.0}, {0.9, 0.1}).size_biased(1.0);
  CHECK(tb.cdf(0.5) == doctest::Approx(0.45 / 0.85));
}

TEST_CASE("importance-sampled sup tail moment") {
  const auto g = TailDistribution::lognormal(-0.5, 0.5);
  Rng rng(12);
  // Below 1 there is no tilt, so the value matches plain sampling exactly in law.
  const auto sample = sample_sup(g, {}, 200000, rng);
  for (double u : {2.0, 4.0}) {
    RunningStats plain;
    for (double x : sample) plain.add(x > u ? x * x : 0.0);
    const Estimate is = sup_tail_moment(g, 2.0, u, {}, 100000, rng);
    CHECK(std::abs(is.value - plain.mean()) < 3.0 * std::hypot(plain.se(), is.se));
  }
  // Relative error stays bounded far in the tail.
  const Estimate far = sup_tail_moment(g, 2.0, 64.0, {}, 50000, rng);
  CHECK(far.value > 0.0);
  CHECK(far.se < 0.05 * far.value);

  CHECK(sup_tail_moment(TailDistribution::point(0.5), 1.0, 0.25, {}, 10, rng).value == 0.5);
  CHECK(sup_tail_moment(TailDistribution::point(0.5), 1.0, 0.5, {}, 10, rng).value == 0.0);
  CHECK(sup_tail_moment(TailDistribution::mixture(0.3, TailDistribution::point(1.0)), 1.0, 1.0, {}, 10, rng).value ==
        0.0);
}
