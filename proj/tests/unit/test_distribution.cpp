#include <doctest.h>

#include <cmath>
#include <vector>

#include "exlab/distribution.hpp"
#include "exlab/error.hpp"
#include "exlab/stats.hpp"

using namespace exlab;

TEST_CASE("point mass draws its value") {
  Rng rng(1);
  const auto d = TailDistribution::point(0.5);
  for (int i = 0; i < 10; ++i) CHECK(d.sample(rng) == 0.5);
  CHECK(d.point_mass_at_zero() == 0.0);
  CHECK(TailDistribution::point(0.0).point_mass_at_zero() == 1.0);
}

TEST_CASE("pareto quantile and inverse-cdf draw") {
  const auto d = TailDistribution::pareto(1.0);
  CHECK(d.quantile(0.5) == doctest::Approx(2.0).epsilon(1e-15));
  for (double t : {2.0, 10.0, 1e3, 1e6}) CHECK(d.upper_quantile(t) == t);
  const auto d2 = TailDistribution::pareto(2.0);
  CHECK(d2.upper_quantile(1e4) == 100.0);
  CHECK(d.survival(1e12) == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(d.alpha().value() == 1.0);
}

TEST_CASE("mixture with full mass at zero always draws 0") {
  Rng rng(2);
  const auto d = TailDistribution::mixture(1.0, TailDistribution::pareto(1.0));
  for (int i = 0; i < 100; ++i) CHECK(d.sample(rng) == 0.0);
  CHECK(d.point_mass_at_zero() == 1.0);
}

TEST_CASE("mixture mass at zero and moments") {
  const auto d = TailDistribution::mixture(0.3, TailDistribution::point(1.0));
  CHECK(d.point_mass_at_zero() == doctest::Approx(0.3));
  CHECK(d.moment(1.0) == doctest::Approx(0.7));
  CHECK(std::isinf(d.mean_log()));
  CHECK(d.upper_bound() == 1.0);
  CHECK(d.cdf(0.0) == doctest::Approx(0.3));
  CHECK(d.cdf_below(1.0) == doctest::Approx(0.3));
}

TEST_CASE("lognormal closed forms") {
  const auto d = TailDistribution::lognormal(-0.5, 0.5);
  CHECK(d.mean_log() == -0.5);
  CHECK(d.moment(2.0) == doctest::Approx(std::exp(-1.0 + 0.5)));
  CHECK(d.cdf(std::exp(-0.5)) == doctest::Approx(0.5));
  CHECK(d.quantile(0.5) == doctest::Approx(std::exp(-0.5)));
  CHECK(std::isinf(d.upper_bound()));
}

TEST_CASE("user table quantile and cdf") {
  const auto d = TailDistribution::table({2.0, 0.0, 1.0}, {1.0, 2.0, 1.0});
  CHECK(d.point_mass_at_zero() == doctest::Approx(0.5));
  CHECK(d.quantile(0.0) == 0.0);
  CHECK(d.quantile(0.49) == 0.0);
  CHECK(d.quantile(0.5) == 0.0);
  CHECK(d.quantile(0.6) == 1.0);
  CHECK(d.quantile(0.9) == 2.0);
  CHECK(d.cdf(1.0) == doctest::Approx(0.75));
  CHECK(d.upper_bound() == 2.0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(TailDistribution::pareto(-1.0), InvalidArgument);
  CHECK_THROWS_AS(TailDistribution::point(-0.1), InvalidArgument);
  CHECK_THROWS_AS(TailDistribution::lognormal(0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(TailDistribution::mixture(1.5, TailDistribution::point(1.0)), InvalidArgument);
  CHECK_THROWS_AS(TailDistribution::table({1.0}, {1.0, 2.0}), InvalidArgument);
}

TEST_CASE("restricted draws lie above the threshold") {
  Rng rng(3);
  for (const auto& d : {TailDistribution::pareto(1.5), TailDistribution::lognormal(0.0, 1.0),
                        TailDistribution::mixture(0.4, TailDistribution::pareto(2.0))}) {
    for (double thr : {0.5, 3.0, 50.0}) {
      for (int i = 0; i < 200; ++i) CHECK(d.sample_above(thr, rng) > thr);
    }
  }
  CHECK_THROWS_AS(TailDistribution::point(1.0).sample_above(2.0, rng), InvalidArgument);
}

TEST_CASE("pareto draws follow the law (chi-square on deciles)") {
  Rng rng(4);
  const auto d = TailDistribution::pareto(1.3, 2.0);
  std::vector<std::uint64_t> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = d.cdf(d.sample(rng));
    ++counts[std::min(9, static_cast<int>(u * 10.0))];
  }
  std::vector<double> probs(10, 0.1);
  CHECK(chi_square_gof(counts, probs).p_value > 0.001);
}

TEST_CASE("family names round trip") {
  for (auto f : {Family::pareto, Family::deterministic_point, Family::lognormal,
                 Family::mixture_with_point_mass_at_zero, Family::user_table}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS_AS(family_from_string("gamma"), InvalidArgument);
}
