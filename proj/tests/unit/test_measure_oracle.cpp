#include <doctest.h>

#include <cmath>
#include <vector>

#include "exlab/error.hpp"
#include "exlab/measure_oracle.hpp"

using namespace exlab;

namespace {

/// Integral over s in (0, x] of alpha s^{-alpha-1} P[s Y > y], by the
/// trapezoid rule on a log grid from the smallest s that can contribute.
double nu_box_by_quadrature(double alpha, const std::vector<double>& ys, double x, double y) {
  double y_max = 0.0;
  for (double v : ys) y_max = std::max(y_max, v);
  const double lo = y / y_max;
  if (lo >= x) return 0.0;
  auto integrand = [&](double s) {
    double k = 0.0;
    for (double v : ys) k += s * v > y ? 1.0 : 0.0;
    return alpha * std::pow(s, -alpha) * k / static_cast<double>(ys.size());  // includes ds = s dlog s
  };
  const int steps = 20000;
  const double h = std::log(x / lo) / steps;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double a = lo * std::exp(h * i);
    const double b = lo * std::exp(h * (i + 1));
    total += 0.5 * h * (integrand(a) + integrand(b));
  }
  return total;
}

}  // namespace

TEST_CASE("nu_box closed forms") {
  const ProductMeasure one = ProductMeasure::deterministic(1.0, 1.0);
  CHECK(one.nu_box(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(one.nu_box(INFINITY, 2.0) == doctest::Approx(0.5));
  const ProductMeasure half = ProductMeasure::deterministic(2.0, 0.5);
  CHECK(half.nu_box(4.0, 1.0) == doctest::Approx(0.1875));
  CHECK(half.nu_box(1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(half.nu_box(1.0, 0.0), InvalidArgument);
  CHECK(nu_alpha_mass(1.0, {1.0, 2.0}) == doctest::Approx(0.5));
  CHECK(nu_alpha_mass(2.0, Interval::above(2.0)) == doctest::Approx(0.25));
  CHECK_THROWS_AS(nu_alpha_mass(1.0, Interval::everything()), InvalidArgument);
}

TEST_CASE("nu_box matches direct integration over an empirical Y") {
  Rng rng(31);
  const TailDistribution law = TailDistribution::lognormal(0.0, 0.7);
  std::vector<double> ys(400);
  for (double& v : ys) v = law.sample(rng);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const ProductMeasure m = ProductMeasure::empirical(alpha, ys);
    for (auto [x, y] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {3.0, 0.5}, {0.5, 2.0}, {10.0, 4.0}}) {
      CAPTURE(alpha);
      CAPTURE(x);
      CHECK(m.nu_box(x, y) == doctest::Approx(nu_box_by_quadrature(alpha, ys, x, y)).epsilon(2e-3));
    }
  }
}

TEST_CASE("nu_box is monotone and scales by lambda^{-alpha}") {
  Rng rng(32);
  std::vector<double> ys(1000);
  const TailDistribution law = TailDistribution::pareto(3.0, 0.2);
  for (double& v : ys) v = law.sample(rng);
  const ProductMeasure m = ProductMeasure::empirical(1.5, ys);
  double prev = 0.0;
  for (double x = 0.1; x < 50.0; x *= 1.3) {
    const double v = m.nu_box(x, 1.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  prev = INFINITY;
  for (double y = 0.1; y < 50.0; y *= 1.3) {
    const double v = m.nu_box(5.0, y);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  for (double lambda : {2.0, 10.0}) {
    for (auto [x, y] : std::vector<std::pair<double, double>>{{1.0, 0.3}, {2.0, 1.0}, {INFINITY, 0.7}}) {
      CHECK(m.nu_box(lambda * x, lambda * y) == doctest::Approx(std::pow(lambda, -1.5) * m.nu_box(x, y)));
    }
  }
}

TEST_CASE("mu_cylinder closed forms") {
  Rng rng(33);
  // G = 0.5, alpha = 1: x0 > 1 and x0 / 2 > 1 has measure 1/2.
  const Estimate e = mu_cylinder(1.0, TailDistribution::point(0.5), {Interval::above(1.0), Interval::above(1.0)},
                                 200000, rng);
  CHECK(e.lo <= 0.5);
  CHECK(e.hi >= 0.5);
  CHECK(e.value == doctest::Approx(0.5).epsilon(0.01));

  const TailDistribution zero = TailDistribution::point(0.0);
  CHECK(mu_cylinder(1.0, zero, {Interval::above(1.0), Interval::above(0.5)}, 1000, rng).value == 0.0);
  CHECK(mu_cylinder(2.0, zero, {Interval::above(2.0), {0.0, 1.0, true}}, 1000, rng).value ==
        doctest::Approx(0.25));
  CHECK(mu_cylinder(1.0, zero, {{1.0, 1.0}}, 10, rng).value == 0.0);
  CHECK_THROWS_AS(mu_cylinder(1.0, zero, {Interval::everything()}, 10, rng), InvalidArgument);
}

TEST_CASE("mu_cylinder with one step agrees with nu_box") {
  // mu((x, inf) x (y, inf)) = nu((x, inf) x (y, inf)) = nu_box(inf, y) - nu_box(x, y).
  Rng rng(34);
  const TailDistribution g = TailDistribution::lognormal(-0.5, 0.5);
  std::vector<double> ys(200000);
  for (double& v : ys) v = g.sample(rng);
  const ProductMeasure m = ProductMeasure::empirical(1.0, ys);
  const double x = 0.5, y = 0.8;
  const double exact = m.nu_box(INFINITY, y) - m.nu_box(x, y);
  const Estimate e = mu_cylinder(1.0, g, {Interval::above(x), Interval::above(y)}, 400000, rng);
  CHECK(std::abs(e.value - exact) < 4.0 * e.se + 0.005);
}

TEST_CASE("truncation bound and delta selection") {
  const ProductMeasure half = ProductMeasure::deterministic(1.0, 0.5);
  CHECK(truncation_error_bound(half, true, 1.0, 2.0, 1.0, 4.0) == doctest::Approx(0.25));
  CHECK(truncation_error_bound(half, true, 1.0, 2.0, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(truncation_error_bound(half, false, 1.0, 2.0, 1.0, 1.0), InvalidArgument);

  Rng rng(35);
  const TailDistribution g = TailDistribution::lognormal(-1.0, 1.0);
  const ProductMeasure s = sup_law(g, 1.0, {10000, 1e-12, 64}, 100000, rng);
  CHECK(s.is_empirical());
  const DeltaChoice d = auto_delta(s, true, 1.0, 2.0, 1.0, 1e-3);
  CHECK(d.bound < 1e-3);
  CHECK(d.bound == truncation_error_bound(s, true, 1.0, 2.0, 1.0, d.delta));
  if (d.delta < 1.0) CHECK(truncation_error_bound(s, true, 1.0, 2.0, 1.0, 2.0 * d.delta) >= 1e-3);
  // Halving delta never raises the bound.
  double prev = INFINITY;
  for (double delta = 1.0; delta > 1e-3; delta /= 2.0) {
    const double b = truncation_error_bound(s, true, 1.0, 2.0, 1.0, delta);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("sup_law is exact for point masses") {
  Rng rng(36);
  const ProductMeasure s = sup_law(TailDistribution::point(0.25), 2.0, {}, 10, rng);
  CHECK_FALSE(s.is_empirical());
  CHECK(s.moment() == doctest::Approx(0.0625));
  CHECK_THROWS_AS(sup_law(TailDistribution::point(1.0), 1.0, {}, 10, rng), InvalidArgument);
}

TEST_CASE("tail-moment overloads and the certified sup tail") {
  const auto half = ProductMeasure::deterministic(1.0, 0.5);
  const TailMoment m = [&](double u) { return half.tail_moment(u); };
  CHECK(truncation_error_bound(m, 1.0, true, 2.0, 3.0, 0.2, 0.25) ==
        truncation_error_bound(half, true, 2.0, 3.0, 0.2, 0.25));
  const DeltaChoice d1 = auto_delta(m, 1.0, true, 1.0, 2.0, 1.0, 1e-3);
  const DeltaChoice d2 = auto_delta(half, true, 1.0, 2.0, 1.0, 1e-3);
  CHECK(d1.delta == d2.delta);
  CHECK(d1.bound == d2.bound);

  const auto g = TailDistribution::lognormal(-0.5, 0.5);
  const TailMoment tail = certified_sup_tail(g, 2.0, {}, 20000, Rng(5));
  const double first = tail(16.0);
  CHECK(tail(16.0) == first);
  CHECK(tail(8.0) >= first);
  CHECK_THROWS_AS(truncation_error_bound(tail, 2.0, false, 1.0, 3.0, 1.0, 0.1), InvalidArgument);
}
