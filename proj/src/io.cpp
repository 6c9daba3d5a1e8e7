#include "exlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "exlab/builtins.hpp"
#include "exlab/error.hpp"

namespace exlab {

namespace {

double get_number(const json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_number()) {
    throw InvalidArgument(std::string("missing or non-numeric parameter '") + key + "'");
  }
  return params.at(key).get<double>();
}

double get_number_or(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  return get_number(params, key);
}

const json& params_of(const json& j) {
  static const json empty = json::object();
  if (!j.contains("params")) return empty;
  if (!j.at("params").is_object()) throw InvalidArgument("'params' must be an object");
  return j.at("params");
}

std::string family_of(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw InvalidArgument("expected an object with a string 'family'");
  }
  return j.at("family").get<std::string>();
}

/// Non-finite values become strings so the output stays valid JSON.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const TailDistribution& d) {
  json p = json::object();
  switch (d.family()) {
    case Family::pareto:
      p["alpha"] = d.param_alpha();
      p["scale"] = d.param_scale();
      break;
    case Family::deterministic_point: p["value"] = d.param_value(); break;
    case Family::lognormal:
      p["mu"] = d.param_mu();
      p["sigma"] = d.param_sigma();
      break;
    case Family::mixture_with_point_mass_at_zero:
      p["p0"] = d.param_p0();
      p["base"] = to_json(d.base());
      break;
    case Family::user_table:
      p["values"] = d.table_values();
      p["weights"] = d.table_weights();
      break;
  }
  return {{"family", std::string(to_string(d.family()))}, {"params", p}};
}

TailDistribution distribution_from_json(const json& j) {
  const std::string fam = family_of(j);
  const json& p = params_of(j);
  switch (family_from_string(fam)) {
    case Family::pareto: return TailDistribution::pareto(get_number(p, "alpha"), get_number_or(p, "scale", 1.0));
    case Family::deterministic_point: return TailDistribution::point(get_number(p, "value"));
    case Family::lognormal: return TailDistribution::lognormal(get_number(p, "mu"), get_number(p, "sigma"));
    case Family::mixture_with_point_mass_at_zero:
      if (!p.contains("base")) throw InvalidArgument("mixture needs a 'base' distribution");
      return TailDistribution::mixture(get_number(p, "p0"), distribution_from_json(p.at("base")));
    case Family::user_table: {
      if (!p.contains("values") || !p.contains("weights")) throw InvalidArgument("user_table needs values and weights");
      try {
        return TailDistribution::table(p.at("values").get<std::vector<double>>(),
                                       p.at("weights").get<std::vector<double>>());
      } catch (const json::exception& e) {
        throw InvalidArgument(std::string("user_table: ") + e.what());
      }
    }
  }
  throw InvalidArgument("unknown family '" + fam + "'");
}

namespace {

json phi_to_json(const Perturbation& phi) {
  switch (phi.kind) {
    case Perturbation::Kind::zero: return {{"family", "zero"}, {"params", json::object()}};
    case Perturbation::Kind::additive_noise:
      return {{"family", "additive_noise"}, {"params", {{"w_law", to_json(*phi.noise)}}}};
    case Perturbation::Kind::scaled_noise:
      return {{"family", "scaled_noise"}, {"params", {{"w_law", to_json(*phi.noise)}, {"power", phi.power}}}};
    case Perturbation::Kind::bounded_custom: {
      json knots = json::array();
      for (const auto& [x, v] : phi.table) knots.push_back({x, v});
      return {{"family", "bounded_custom"}, {"params", {{"table", knots}}}};
    }
  }
  return {};
}

Perturbation phi_from_json(const json& j) {
  const std::string fam = family_of(j);
  const json& p = params_of(j);
  if (fam == "zero") return Perturbation::none();
  if (fam == "additive_noise") {
    if (!p.contains("w_law")) throw InvalidArgument("additive_noise needs 'w_law'");
    return Perturbation::additive(distribution_from_json(p.at("w_law")));
  }
  if (fam == "scaled_noise") {
    if (!p.contains("w_law")) throw InvalidArgument("scaled_noise needs 'w_law'");
    return Perturbation::scaled(distribution_from_json(p.at("w_law")), get_number_or(p, "power", 1.0));
  }
  if (fam == "bounded_custom") {
    if (!p.contains("table") || !p.at("table").is_array()) throw InvalidArgument("bounded_custom needs a 'table'");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : p.at("table")) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        throw InvalidArgument("bounded_custom table entries must be [x, value] pairs");
      }
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return Perturbation::custom(std::move(knots));
  }
  throw InvalidArgument("unknown perturbation family '" + fam + "'");
}

json boundary_to_json(const ExtremalBoundary& b) {
  switch (b.kind) {
    case ExtremalBoundary::Kind::atom: return {{"family", "atom"}, {"params", json::object()}};
    case ExtremalBoundary::Kind::power_law:
      return {{"family", "power_law"}, {"params", {{"coefficient", b.coefficient}, {"exponent", b.exponent}}}};
    case ExtremalBoundary::Kind::custom: return {{"family", "custom"}, {"params", json::object()}};
  }
  return {};
}

ExtremalBoundary boundary_from_json(const json& j) {
  const std::string fam = family_of(j);
  const json& p = params_of(j);
  if (fam == "atom") return ExtremalBoundary::atom();
  if (fam == "power_law") return ExtremalBoundary::power_law(get_number(p, "coefficient"), get_number(p, "exponent"));
  throw InvalidArgument("boundary family '" + fam + "' cannot be read from JSON (use atom or power_law)");
}

}  // namespace

json to_json(const KernelSpec& k) {
  return {{"spec_version", kSpecVersion}, {"name", k.name},
          {"z_law", to_json(k.z_law)},    {"phi", phi_to_json(k.phi)},
          {"atom_upper", k.atom_upper},   {"h_return", to_json(k.h_return)},
          {"boundary", boundary_to_json(k.boundary)}};
}

KernelSpec kernel_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("kernel must be a JSON object");
  if (j.contains("spec_version") && j.at("spec_version") != kSpecVersion) {
    throw InvalidArgument("unsupported spec_version (expected 1)");
  }
  if (j.contains("builtin")) {
    if (!j.at("builtin").is_string()) throw InvalidArgument("'builtin' must be a string");
    const json& p = params_of(j);
    BuiltinParams bp;
    auto opt = [&](const char* key, std::optional<double>& field) {
      if (p.contains(key)) field = get_number(p, key);
    };
    opt("alpha", bp.alpha);
    opt("rho", bp.rho);
    opt("p0", bp.p0);
    opt("mu", bp.mu);
    opt("sigma", bp.sigma);
    opt("noise_scale", bp.noise_scale);
    opt("atom_upper", bp.atom_upper);
    for (const auto& [key, value] : p.items()) {
      static const std::vector<std::string> known{"alpha", "rho", "p0", "mu", "sigma", "noise_scale", "atom_upper"};
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw InvalidArgument("unknown builtin parameter '" + key + "'");
      }
    }
    return builtin_kernel(j.at("builtin").get<std::string>(), bp);
  }
  KernelSpec k;
  if (j.contains("name")) k.name = j.at("name").get<std::string>();
  if (!j.contains("z_law") || !j.contains("h_return")) throw InvalidArgument("kernel needs 'z_law' and 'h_return'");
  k.z_law = distribution_from_json(j.at("z_law"));
  k.h_return = distribution_from_json(j.at("h_return"));
  if (j.contains("phi")) k.phi = phi_from_json(j.at("phi"));
  if (j.contains("atom_upper")) k.atom_upper = get_number(j, "atom_upper");
  if (j.contains("boundary")) k.boundary = boundary_from_json(j.at("boundary"));
  k.validate();
  return k;
}

json to_json(const Estimate& e) {
  return {{"value", number(e.value)}, {"se", number(e.se)}, {"lo", number(e.lo)}, {"hi", number(e.hi)}, {"n", e.n}};
}

json to_json(const SupStatistics& s) {
  return {{"p_sup_le_1", to_json(s.p_sup_le_1)},
          {"e_sup_alpha", to_json(s.e_sup_alpha)},
          {"e_sup_alpha_above_1", to_json(s.e_sup_alpha_above_1)},
          {"c", to_json(s.c)},
          {"theta", to_json(s.theta)},
          {"n_reps", s.n_reps},
          {"truncated_paths", s.truncated_paths},
          {"normal_ci", s.normal_ci},
          {"horizon_doubling_delta", number(s.horizon_doubling_delta)},
          {"horizon_doubling_agrees", s.horizon_doubling_agrees}};
}

json to_json(const LimitConstants& c) {
  json j = {{"alpha", c.alpha},
            {"e_xi_alpha", to_json(c.e_xi_alpha)},
            {"e_sup_alpha", to_json(c.e_sup_alpha)},
            {"e_sup_alpha_above_1", to_json(c.e_sup_alpha_above_1)},
            {"p_sup_le_1", to_json(c.p_sup_le_1)},
            {"c", to_json(c.c)}};
  j["q"] = c.q ? to_json(*c.q) : json(nullptr);
  j["theta_stationary"] = c.theta_stationary ? to_json(*c.theta_stationary) : json(nullptr);
  j["theta_regenerative"] = c.theta_regenerative ? to_json(*c.theta_regenerative) : json(nullptr);
  j["provenance"] = {{"kind", c.provenance.kind == Provenance::Kind::analytic ? "analytic" : "monte_carlo"},
                     {"n_reps", c.provenance.n_reps},
                     {"level", c.provenance.level}};
  return j;
}

json to_json(const ConditionReport& r) {
  json rows = json::array();
  for (const auto& e : r.estimates) {
    json row = {{"t", e.t}, {"m", e.m}, {"a", e.a}, {"delta", e.delta}, {"eta", e.eta}, {"label", e.label},
                {"estimate", to_json(e.estimate)}, {"t_scaled", e.t_scaled}, {"unresolved", e.unresolved}};
    if (e.reference) row["reference"] = to_json(*e.reference);
    rows.push_back(row);
  }
  return {{"condition_id", std::string(to_string(r.id))},
          {"verdict", std::string(to_string(r.verdict))},
          {"rationale", r.rationale},
          {"estimates", rows}};
}

json to_json(const ComparisonReport& r) {
  json rows = json::array();
  for (const auto& b : r.rows) {
    rows.push_back({{"s", b.box.s},
                    {"a", b.box.a},
                    {"mean_empirical", b.mean_empirical},
                    {"mean_limit", b.mean_limit},
                    {"statistic", b.statistic},
                    {"df", b.df},
                    {"p_value", b.p_value},
                    {"skipped", b.skipped},
                    {"note", b.note}});
  }
  return {{"boxes", rows},
          {"level", r.level},
          {"bonferroni_level", r.bonferroni_level},
          {"verdict", r.consistent ? "consistent" : "inconsistent"}};
}

json to_json(const MaxLawReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"x", row.x}, {"empirical", to_json(row.empirical)}, {"limit", row.limit}});
  }
  return {{"rows", rows}, {"sup_distance", r.sup_distance}, {"ci_half_width", r.ci_half_width}, {"b_n", r.b_n}};
}

namespace {

json fit_json(const TailFit& f) {
  json rows = json::array();
  for (const auto& r : f.rows) {
    rows.push_back({{"x", r.x}, {"count", r.count}, {"p_hat", r.p_hat}, {"scaled", r.scaled}, {"zero_count", r.zero_count}});
  }
  return {{"c_hat", f.c_hat}, {"c_se", f.c_se}, {"alpha_hat", f.alpha_hat}, {"alpha_se", f.alpha_se}, {"rows", rows}};
}

}  // namespace

json to_json(const std::vector<TailFitAtT>& fits) {
  json out = json::array();
  for (const auto& f : fits) {
    out.push_back({{"t", f.t},
                   {"b_t", f.b_t},
                   {"full_cycle", fit_json(f.full_cycle)},
                   {"extremal_component", fit_json(f.extremal_component)}});
  }
  return out;
}

json to_json(const TransienceReport& r) {
  return {{"verdict", std::string(to_string(r.verdict))}, {"mean_log", to_json(r.mean_log)}, {"analytic", r.analytic}};
}

json to_json(const ClusterSizes& s) {
  return {{"histogram", s.histogram}, {"clusters", s.clusters}, {"mean", s.mean}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream& os, const ChainPath& path) {
  os << "j,state,in_atom\n";
  for (std::size_t j = 0; j < path.size(); ++j) {
    os << j << ',' << format_double(path.states[j]) << ',' << static_cast<int>(path.atom_flags[j]) << '\n';
  }
}

void write_cycles_csv(std::ostream& os, const CycleDecomposition& d) {
  os << "start,tau_A,tau_t,max_value,max_extremal,first_state\n";
  for (const auto& c : d.cycles) {
    os << c.start << ',' << c.tau_a << ',' << c.tau_t << ',' << format_double(c.max_value) << ','
       << format_double(c.max_extremal) << ',' << format_double(c.first_state) << '\n';
  }
}

void write_pattern_csv(std::ostream& os, const PointPattern& p) {
  const bool limit = p.kind != PatternKind::empirical_Nn;
  os << (limit ? "time,mark,stack_id\n" : "time,mark\n");
  for (const auto& pt : p.points) {
    os << format_double(pt.time) << ',' << format_double(pt.mark);
    if (limit) os << ',' << pt.stack_id;
    os << '\n';
  }
}

void write_stacks_csv(std::ostream& os, const std::vector<ClusterStack>& stacks) {
  os << "stack_id,time,seed_mark,size,died\n";
  for (std::size_t k = 0; k < stacks.size(); ++k) {
    const auto& s = stacks[k];
    os << k << ',' << format_double(s.time) << ',' << format_double(s.seed_mark) << ',' << s.marks.size() << ','
       << (s.died ? 1 : 0) << '\n';
  }
}

}  // namespace exlab
