#include <doctest.h>

#include <cmath>
#include <sstream>

#include "exlab/builtins.hpp"
#include "exlab/error.hpp"
#include "exlab/io.hpp"

using namespace exlab;

namespace {

void same_law(const TailDistribution& a, const TailDistribution& b) {
  CHECK(a.family() == b.family());
  for (double x : {0.0, 0.3, 1.0, 2.5, 40.0}) CHECK(a.cdf(x) == b.cdf(x));
}

}  // namespace

TEST_CASE("distribution JSON round trip") {
  for (const auto& d : {TailDistribution::pareto(1.5, 2.0), TailDistribution::point(0.5),
                        TailDistribution::lognormal(-0.5, 0.3),
                        TailDistribution::mixture(0.25, TailDistribution::lognormal(0.0, 1.0)),
                        TailDistribution::table({0.5, 2.0}, {0.75, 0.25})}) {
    same_law(d, distribution_from_json(json::parse(to_json(d).dump())));
  }
  CHECK_THROWS_AS(distribution_from_json(json::parse(R"({"family": "cauchy", "params": {}})")), InvalidArgument);
  CHECK_THROWS_AS(distribution_from_json(json::parse(R"({"family": "pareto", "params": {}})")), InvalidArgument);
  CHECK_THROWS_AS(distribution_from_json(json::parse(R"([1, 2])")), InvalidArgument);
}

TEST_CASE("kernel JSON round trip") {
  for (const auto& info : list_builtin_kernels()) {
    const KernelSpec k = builtin_kernel(info.name);
    const KernelSpec back = kernel_from_json(json::parse(to_json(k).dump()));
    CHECK(back.name == k.name);
    CHECK(back.atom_upper == k.atom_upper);
    CHECK(back.phi.kind == k.phi.kind);
    same_law(back.z_law, k.z_law);
    same_law(back.h_return, k.h_return);
    CHECK(to_json(back) == to_json(k));
  }
  KernelSpec custom = builtin_kernel("det-contract");
  custom.phi = Perturbation::custom({{0.0, 0.0}, {10.0, 1.0}});
  custom.boundary = ExtremalBoundary::power_law(2.0, 0.5);
  CHECK(to_json(kernel_from_json(to_json(custom))) == to_json(custom));
}

TEST_CASE("builtin kernels from JSON") {
  const KernelSpec k = kernel_from_json(json::parse(R"({"builtin": "geo-kill", "params": {"p0": 0.25}})"));
  CHECK(k.z_law.param_p0() == 0.25);
  CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"builtin": "geo-kill", "params": {"p": 0.25}})")),
                  InvalidArgument);
  CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"builtin": "nope"})")), InvalidArgument);
}

TEST_CASE("non-finite estimates serialize as strings") {
  const json j = to_json(Estimate{INFINITY, NAN, 0.0, INFINITY, 3});
  CHECK(j["value"] == "inf");
  CHECK(j["se"] == "nan");
  CHECK(j["lo"] == 0.0);
  CHECK(j["n"] == 3);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("CSV writers") {
  ChainPath p;
  p.states = {2.5, 0.5, 3.0, 0.25};
  p.atom_flags = {0, 1, 0, 1};
  std::ostringstream path_csv;
  write_path_csv(path_csv, p);
  CHECK(path_csv.str() == "j,state,in_atom\n0,2.5,0\n1,0.5,1\n2,3,0\n3,0.25,1\n");

  PointPattern pat;
  pat.kind = PatternKind::limit_eta_delta;
  pat.points = {{0.5, 2.0, 0}, {0.5, 1.0, 0}};
  std::ostringstream pat_csv;
  write_pattern_csv(pat_csv, pat);
  CHECK(pat_csv.str() == "time,mark,stack_id\n0.5,2,0\n0.5,1,0\n");

  std::ostringstream stacks_csv;
  write_stacks_csv(stacks_csv, {{0.5, 2.0, {2.0, 1.0}, true}});
  CHECK(stacks_csv.str() == "stack_id,time,seed_mark,size,died\n0,0.5,2,2,1\n");
}
