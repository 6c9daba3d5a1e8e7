#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "exlab/builtins.hpp"
#include "exlab/cycles.hpp"
#include "exlab/diagnostics.hpp"
#include "exlab/error.hpp"
#include "exlab/measure_oracle.hpp"
#include "exlab/point_process.hpp"
#include "exlab/tail_chain.hpp"

namespace exlab::cli {

void Context::progress(const std::string& message) const {
  if (!quiet) std::cerr << "exlab " << command << ": " << message << std::endl;
}

namespace {

/// Typed, defaulted access to one JSON object with unknown-key rejection.
class Section {
 public:
  Section(const json& object, std::string name, const std::vector<std::string>& known) : name_(std::move(name)) {
    if (!object.is_null()) j_ = object;
    require(j_.is_object(), name_ + ": must be an object");
    for (const auto& [key, value] : j_.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw InvalidArgument(name_ + ": unknown key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return as_number(j_.at(key), key);
  }

  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return as_number(j_.at(key), key);
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) const {
    if (!has(key)) return fallback;
    return as_count(j_.at(key), key, min);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_array() && !v.empty(), where(key) + ": must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(as_number(x, key));
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    require(v.is_array() && !v.empty(), where(key) + ": must be a non-empty array of integers");
    std::vector<std::size_t> out;
    for (const auto& x : v) out.push_back(as_count(x, key, 0));
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    require(j_.at(key).is_string(), where(key) + ": must be a string");
    return j_.at(key).get<std::string>();
  }

 private:
  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  double as_number(const json& v, const std::string& key) const {
    require(v.is_number(), where(key) + ": must be a number");
    const double x = v.get<double>();
    require(std::isfinite(x), where(key) + ": must be finite");
    return x;
  }

  std::size_t as_count(const json& v, const std::string& key, std::size_t min) const {
    const double x = as_number(v, key);
    require(x == std::floor(x) && x >= 0.0 && x < 9e15, where(key) + ": must be a non-negative integer");
    require(x >= static_cast<double>(min), where(key) + ": must be >= " + std::to_string(min));
    return static_cast<std::size_t>(x);
  }

  json j_ = json::object();
  std::string name_;
};

const std::map<std::string, std::pair<std::string, std::vector<std::string>>>& sections() {
  static const std::map<std::string, std::pair<std::string, std::vector<std::string>>> s{
      {"simulate", {"simulate", {"x0"}}},
      {"tailchain", {"tailchain", {"g", "horizon", "kill_epsilon", "min_steps", "m_grid", "a", "q", "q_steps"}}},
      {"cycles", {"cycles", {"t_grid", "x_grid", "t", "max_law"}}},
      {"limit-sample",
       {"limit_sample",
        {"mode", "delta", "s_max", "mark_floor", "a", "q", "q_steps", "target", "sup_reps", "horizon",
         "kill_epsilon"}}},
      {"converge",
       {"converge", {"s_grid", "a_grid", "restrict_delta", "q", "level", "target", "sup_reps", "horizon"}}},
      {"diagnose",
       {"diagnose",
        {"tolerance", "level", "t_grid", "m_grid", "a", "delta", "delta_grid", "m0", "m0_prime", "eta_grid", "n_reps",
         "reps_per_unit_t", "batch", "step_cap", "joint_m", "joint_reps"}}},
  };
  return s;
}

Section root(const json& config) { return Section(config, "", top_level_keys()); }

Section section(const Context& ctx) {
  const auto& [name, keys] = sections().at(ctx.command);
  return Section(ctx.config.contains(name) ? ctx.config.at(name) : json(), name, keys);
}

KernelSpec kernel_of(const json& config) {
  require(config.contains("kernel"), "kernel: required (builtin name or kernel object)");
  const json& k = config.at("kernel");
  if (k.is_string()) return kernel_from_json({{"builtin", k}});
  return kernel_from_json(k);
}

double alpha_of(const json& config, const KernelSpec& k) {
  const Section r = root(config);
  if (r.has("alpha")) return r.number("alpha", 1.0);
  const auto a = kernel_alpha(k);
  require(a.has_value(), "alpha: required when the return law H is not Pareto");
  return *a;
}

std::size_t n_of(const json& config, std::size_t fallback) { return root(config).count("n", fallback); }
std::size_t reps_of(const json& config, std::size_t fallback) { return root(config).count("n_reps", fallback); }
double level_of(const json& config) { return root(config).number("level", 0.99); }
std::uint64_t cap_of(const json& config) { return root(config).count("cycle_cap", kDefaultCycleCap); }

json base_summary(const Context& ctx, const KernelSpec& k) {
  return {{"command", ctx.command}, {"spec_version", kSpecVersion}, {"seed", ctx.seed}, {"kernel", to_json(k)}};
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out + '\n';
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

/// q from config, the closed form, or a simulated path of q_steps steps.
std::pair<Estimate, std::string> resolve_q(const Context& ctx, const Section& s, const KernelSpec& k, Rng rng) {
  if (s.has("q")) {
    const double q = s.number("q", 1.0);
    require(q >= 1.0, "q: must be >= 1");
    return {{q, 0.0, q, q, 0}, "config"};
  }
  if (const auto q = analytic_q(k)) return {{*q, 0.0, *q, *q, 0}, "analytic"};
  ctx.progress("estimating q by simulation");
  const std::size_t steps = s.count("q_steps", 1'000'000);
  return {estimate_q(k, steps, 1, rng, level_of(ctx.config)), "simulated"};
}

TailChainLimits limits_of(const Section& s) {
  TailChainLimits l;
  l.horizon = s.count("horizon", l.horizon);
  l.kill_epsilon = s.number("kill_epsilon", l.kill_epsilon);
  l.min_steps = s.count("min_steps", l.min_steps, 0);
  require(l.kill_epsilon > 0.0 && l.kill_epsilon < 1.0, "kill_epsilon: must lie in (0, 1)");
  return l;
}

}  // namespace

const std::vector<std::string>& top_level_keys() {
  static const std::vector<std::string> keys{"kernel", "seed",     "n",           "n_reps",    "level",
                                             "alpha",  "cycle_cap", "output_dir", "simulate",  "tailchain", "cycles",
                                             "limit_sample", "converge", "diagnose"};
  return keys;
}

void validate_config(const std::string& command, const json& config) {
  require(config.is_object(), "config: must be a JSON object");
  const Section r = root(config);
  if (r.has("seed")) r.count("seed", 0, 0);
  r.count("n", 1);
  r.count("n_reps", 1);
  r.count("cycle_cap", 1);
  const double level = r.number("level", 0.99);
  require(level > 0.0 && level < 1.0, "level: must lie in (0, 1)");
  if (r.has("alpha")) require(r.number("alpha", 1.0) > 0.0, "alpha: must be positive");
  r.text("output_dir", "");
  const KernelSpec k = kernel_of(config);
  alpha_of(config, k);
  const auto it = sections().find(command);
  if (it != sections().end()) {
    const auto& [name, keys] = it->second;
    Section(config.contains(name) ? config.at(name) : json(), name, keys);
  }
}

json run_simulate(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const std::size_t n = n_of(ctx.config, 100'000);
  Rng rng(ctx.seed);
  const InitialState init = s.has("x0") ? InitialState::fixed(s.number("x0", 0.0)) : InitialState::from_h();
  ctx.progress("simulating " + std::to_string(n) + " steps of " + k.name);
  const ChainPath path = simulate_path(k, init, n, rng, cap_of(ctx.config));

  std::ostringstream csv;
  write_path_csv(csv, path);
  ctx.out->write("path.csv", csv.str());

  json summary = base_summary(ctx, k);
  summary["n"] = n;
  std::size_t visits = 0;
  double max = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    visits += path.atom_flags[j];
    max = std::max(max, path.states[j]);
    mean += (path.states[j] - mean) / static_cast<double>(j + 1);
  }
  summary["atom_visits"] = visits;
  summary["max_state"] = max;
  summary["mean_state"] = mean;
  try {
    const CycleDecomposition d = decompose(path, k.atom_upper, level_of(ctx.config));
    summary["cycles"] = d.cycles.size();
    summary["q_hat"] = to_json(d.q_hat);
  } catch (const EstimationError& e) {
    summary["cycles"] = 0;
    summary["q_hat"] = nullptr;
    summary["note"] = e.what();
  }
  return summary;
}

json run_tailchain(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const double alpha = alpha_of(ctx.config, k);
  const double level = level_of(ctx.config);
  const std::size_t reps = reps_of(ctx.config, 100'000);
  const bool g_override = s.has("g");
  const TailDistribution g = g_override ? distribution_from_json(s.raw("g")) : k.z_law;
  const TailChainLimits limits = limits_of(s);
  const Rng rng(ctx.seed);

  ctx.progress("transience check");
  Rng r0 = rng.split(0);
  const TransienceReport tr = check_transience(g, alpha, 100'000, r0, level);
  ctx.progress("constants c and theta from " + std::to_string(reps) + " tail-chain runs");
  Rng r1 = rng.split(1);
  LimitConstants constants = constant_c(g, alpha, limits, reps, r1, level);

  json summary = base_summary(ctx, k);
  summary["g"] = to_json(g);
  summary["transience"] = to_json(tr);
  if (!g_override || s.has("q")) {
    const auto [q, source] = resolve_q(ctx, s, k, rng.split(2));
    constants.q = q;
    summary["q_source"] = source;
    if (q.value > 1.0) fill_extremal_index(constants);
  } else {
    summary["q_source"] = nullptr;
  }
  summary["constants"] = to_json(constants);

  const auto m_grid = s.counts("m_grid", {1, 2, 4, 8});
  const double a = s.number("a", 1.0);
  require(a > 0.0, "tailchain.a: must be positive");
  ctx.progress("tail exceedance of sup_{j>=m} xi(j)");
  Rng r3 = rng.split(3);
  const auto exceed = tail_sup_exceedance(g, m_grid, a, limits, reps, r3, level);
  std::string csv = csv_row({"m", "a", "estimate", "lo", "hi"});
  json rows = json::array();
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    csv += csv_row({num(m_grid[i]), num(a), num(exceed[i].value), num(exceed[i].lo), num(exceed[i].hi)});
    rows.push_back({{"m", m_grid[i]}, {"a", a}, {"estimate", to_json(exceed[i])}});
  }
  ctx.out->write("tail_sup_exceedance.csv", csv);
  summary["tail_sup_exceedance"] = rows;
  return summary;
}

json run_cycles(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const double alpha = alpha_of(ctx.config, k);
  const double level = level_of(ctx.config);
  const std::size_t n = n_of(ctx.config, 1'000'000);
  const auto t_grid = s.numbers("t_grid", {1e2, 1e3});
  const auto x_grid = s.numbers("x_grid", {0.5, 1.0, 2.0, 4.0});
  for (double t : t_grid) require(t >= 1.0, "cycles.t_grid: t must be >= 1");
  const double t_in_force = s.number("t", t_grid.back());
  require(t_in_force > 0.0, "cycles.t: must be positive");
  const Rng rng(ctx.seed);

  ctx.progress("simulating " + std::to_string(n) + " steps of " + k.name);
  Rng r0 = rng.split(0);
  const ChainPath path = simulate_path(k, InitialState::from_h(), n, r0, cap_of(ctx.config));
  const double threshold = downcrossing_level(k, t_in_force);
  const CycleDecomposition d = decompose(path, threshold, level);
  // decompose() takes the atom from the path flags; the threshold is t y(t).
  std::ostringstream csv;
  write_cycles_csv(csv, d);
  ctx.out->write("cycles.csv", csv.str());

  json summary = base_summary(ctx, k);
  summary["n"] = n;
  summary["threshold"] = threshold;
  summary["cycles"] = d.cycles.size();
  summary["q_hat"] = to_json(d.q_hat);
  Rng r1 = rng.split(1);
  const ScalingFunction b = ScalingFunction::for_law(k.h_return, alpha, r1);
  try {
    const auto fits = cycle_max_tail_fit(d, b, t_grid, x_grid);
    summary["tail_fit"] = to_json(fits);
    std::string fit_csv = csv_row({"t", "b_t", "component", "x", "count", "p_hat", "scaled", "zero_count"});
    for (const auto& f : fits) {
      for (const auto& [name, fit] : {std::pair{"full_cycle", &f.full_cycle}, {"extremal_component", &f.extremal_component}}) {
        for (const auto& r : fit->rows) {
          fit_csv += csv_row({num(f.t), num(f.b_t), name, num(r.x), num(r.count), num(r.p_hat), num(r.scaled),
                              r.zero_count ? "1" : "0"});
        }
      }
    }
    ctx.out->write("tail_fit.csv", fit_csv);
  } catch (const EstimationError& e) {
    summary["tail_fit"] = nullptr;
    summary["tail_fit_error"] = e.what();
  }

  if (s.has("max_law")) {
    const Section m(s.raw("max_law"), "cycles.max_law", {"n", "x_grid", "n_reps"});
    const std::size_t mn = m.count("n", 10'000);
    const std::size_t mreps = m.count("n_reps", 1000);
    const auto mx = m.numbers("x_grid", {0.5, 1.0, 2.0, 4.0});
    ctx.progress("maximum law over " + std::to_string(mreps) + " paths of " + std::to_string(mn) + " steps");
    Rng r2 = rng.split(2);
    LimitConstants c = constant_c(k.z_law, alpha, {}, reps_of(ctx.config, 100'000), r2, level);
    c.q = d.q_hat;
    Rng r3 = rng.split(3);
    summary["max_law"] = to_json(max_distribution_check(k, b, mn, mx, mreps, c, r3, level));
  }
  return summary;
}

namespace {

LimitSpec limit_spec(const Context& ctx, const Section& s, const KernelSpec& k, double alpha, double q,
                     double default_floor, Rng rng) {
  const std::string mode = s.text("mode", "eta_delta");
  Window w;
  w.s_max = s.number("s_max", 1.0);
  if (mode == "eta_delta") {
    LimitSpec spec;
    spec.alpha = alpha;
    spec.q = q;
    spec.g = k.z_law;
    spec.delta = s.number("delta", default_floor);
    w.mark_floor = s.number("mark_floor", spec.delta);
    spec.window = w;
    spec.limits.horizon = s.count("horizon", spec.limits.horizon);
    return spec;
  }
  require(mode == "eta_approx", "mode: must be eta_delta or eta_approx");
  const double a = s.number("a", default_floor);
  w.mark_floor = s.number("mark_floor", a);
  TailChainLimits limits;
  limits.horizon = s.count("horizon", limits.horizon);
  ctx.progress("tail moment of sup xi(j) for the truncation bound");
  const TailMoment sup = certified_sup_tail(k.z_law, alpha, limits, s.count("sup_reps", 100'000, 2), rng,
                                           level_of(ctx.config));
  LimitSpec spec = prepare_eta_approx(alpha, q, k.z_law, w, a, sup, sup_moment_certified(k.z_law, alpha),
                                      s.number("target", 1e-3));
  spec.limits.horizon = limits.horizon;
  return spec;
}

json limit_spec_json(const LimitSpec& s) {
  json j = {{"alpha", s.alpha},
            {"q", s.q},
            {"g", to_json(s.g)},
            {"delta", s.delta},
            {"s_max", s.window.s_max},
            {"mark_floor", s.window.mark_floor},
            {"mode", s.mode == LimitMode::eta_delta ? "eta_delta" : "eta_approx"}};
  j["truncation_bound"] = s.truncation_bound ? json(*s.truncation_bound) : json(nullptr);
  j["bound_level"] = s.bound_level ? json(*s.bound_level) : json(nullptr);
  return j;
}

}  // namespace

json run_limit_sample(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const double alpha = alpha_of(ctx.config, k);
  const std::size_t reps = reps_of(ctx.config, 1);
  const Rng rng(ctx.seed);
  const auto [q, q_source] = resolve_q(ctx, s, k, rng.split(0));
  const LimitSpec spec = limit_spec(ctx, s, k, alpha, q.value, 1.0, rng.split(1));
  const double a = s.number("a", spec.window.mark_floor);

  ctx.progress("sampling " + std::to_string(reps) + " limit replicates");
  Rng r2 = rng.split(2);
  std::string points = csv_row({"rep", "time", "mark", "stack_id"});
  std::string stacks = csv_row({"rep", "stack_id", "time", "seed_mark", "size", "died"});
  std::vector<std::size_t> pooled;
  double mean_stacks = 0.0, mean_points = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const LimitSample ls = sample_limit(spec, r2);
    for (const auto& p : ls.pattern.points) points += csv_row({num(r), num(p.time), num(p.mark), std::to_string(p.stack_id)});
    for (std::size_t i = 0; i < ls.stacks.size(); ++i) {
      const auto& st = ls.stacks[i];
      stacks += csv_row({num(r), num(i), num(st.time), num(st.seed_mark), num(st.marks.size()), st.died ? "1" : "0"});
    }
    mean_stacks += static_cast<double>(ls.stacks.size());
    mean_points += static_cast<double>(ls.pattern.points.size());
    const ClusterSizes cs = cluster_size_distribution(ls.pattern, a);
    if (pooled.size() < cs.histogram.size()) pooled.resize(cs.histogram.size(), 0);
    for (std::size_t i = 0; i < cs.histogram.size(); ++i) pooled[i] += cs.histogram[i];
  }
  ctx.out->write("points.csv", points);
  ctx.out->write("stacks.csv", stacks);

  ClusterSizes total;
  total.histogram = pooled;
  double weighted = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    total.clusters += pooled[i];
    weighted += static_cast<double>(i * pooled[i]);
  }
  total.mean = total.clusters > 0 ? weighted / static_cast<double>(total.clusters) : 0.0;

  json summary = base_summary(ctx, k);
  summary["limit"] = limit_spec_json(spec);
  summary["q"] = to_json(q);
  summary["q_source"] = q_source;
  summary["replicates"] = reps;
  summary["mean_stacks"] = mean_stacks / static_cast<double>(reps);
  summary["mean_points"] = mean_points / static_cast<double>(reps);
  summary["cluster_sizes"] = to_json(total);
  summary["cluster_level"] = a;
  return summary;
}

json run_converge(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const double alpha = alpha_of(ctx.config, k);
  const std::size_t n = n_of(ctx.config, 100'000);
  const std::size_t reps = reps_of(ctx.config, 1000);
  const auto s_grid = s.numbers("s_grid", {0.25, 0.5, 1.0});
  const auto a_grid = s.numbers("a_grid", {0.5, 1.0, 2.0});
  const double floor = *std::min_element(a_grid.begin(), a_grid.end());
  require(floor > 0.0, "converge.a_grid: levels must be positive");
  const double s_max = *std::max_element(s_grid.begin(), s_grid.end());
  require(s_max > 0.0, "converge.s_grid: times must be positive");
  const std::optional<double> restrict_delta = s.maybe_number("restrict_delta");
  const double cmp_level = s.number("level", 0.01);
  const Rng rng(ctx.seed);

  Rng r0 = rng.split(0);
  const ScalingFunction b = ScalingFunction::for_law(k.h_return, alpha, r0);
  const double b_n = b(static_cast<double>(n));
  const Window window{s_max, floor};
  const std::size_t steps = static_cast<std::size_t>(std::ceil(s_max * static_cast<double>(n)));

  ctx.progress("simulating " + std::to_string(reps) + " paths of " + std::to_string(steps) + " steps");
  const Rng paths = rng.split(1);
  std::vector<PointPattern> empirical;
  RunningStats lengths;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng local = paths.split(r);
    const ChainPath path = simulate_path(k, InitialState::from_h(), steps, local, cap_of(ctx.config));
    empirical.push_back(restrict_delta ? build_Nn_restricted(path, n, b_n, window, *restrict_delta)
                                       : build_Nn(path, n, b_n, window));
    try {
      for (const auto& c : decompose(path, k.atom_upper).cycles) lengths.add(static_cast<double>(c.length));
    } catch (const EstimationError&) {
    }
  }

  Estimate q;
  std::string q_source;
  if (s.has("q")) {
    q = {s.number("q", 1.0), 0.0, s.number("q", 1.0), s.number("q", 1.0), 0};
    q_source = "config";
  } else if (const auto aq = analytic_q(k)) {
    q = {*aq, 0.0, *aq, *aq, 0};
    q_source = "analytic";
  } else {
    require(lengths.count() > 0, "converge: no complete cycle in the simulated paths; set converge.q");
    q = lengths.estimate(level_of(ctx.config));
    q_source = "simulated";
  }

  LimitSpec spec;
  if (restrict_delta) {
    spec.alpha = alpha;
    spec.q = q.value;
    spec.g = k.z_law;
    spec.delta = *restrict_delta;
    spec.window = window;
  } else if (k.z_law.upper_bound() <= 1.0) {
    // Marks never rise along a stack, so seeds below the floor contribute nothing.
    spec.alpha = alpha;
    spec.q = q.value;
    spec.g = k.z_law;
    spec.delta = floor;
    spec.window = window;
  } else {
    TailChainLimits limits;
    limits.horizon = s.count("horizon", limits.horizon);
    ctx.progress("tail moment of sup xi(j) for the truncation bound");
    const TailMoment sup = certified_sup_tail(k.z_law, alpha, limits, s.count("sup_reps", 100'000, 2), rng.split(2),
                                             level_of(ctx.config));
    spec = prepare_eta_approx(alpha, q.value, k.z_law, window, floor, sup, sup_moment_certified(k.z_law, alpha),
                              s.number("target", 1e-3));
  }
  spec.limits.horizon = s.count("horizon", spec.limits.horizon);

  ctx.progress("sampling " + std::to_string(reps) + " limit replicates");
  Rng r3 = rng.split(3);
  std::vector<PointPattern> limit;
  for (std::size_t r = 0; r < reps; ++r) limit.push_back(sample_limit(spec, r3).pattern);

  std::vector<Box> boxes;
  for (double sv : s_grid) {
    for (double av : a_grid) boxes.push_back({sv, av});
  }
  const ComparisonReport report = compare_patterns(empirical, limit, boxes, cmp_level, std::min<std::size_t>(reps, 500));
  std::string csv = csv_row({"s", "a", "mean_empirical", "mean_limit", "statistic", "df", "p_value", "skipped"});
  for (const auto& row : report.rows) {
    csv += csv_row({num(row.box.s), num(row.box.a), num(row.mean_empirical), num(row.mean_limit),
                    num(row.statistic), std::to_string(row.df), num(row.p_value), row.skipped ? "1" : "0"});
  }
  ctx.out->write("box_comparison.csv", csv);

  json summary = base_summary(ctx, k);
  summary["n"] = n;
  summary["replicates"] = reps;
  summary["b_n"] = b_n;
  summary["q"] = to_json(q);
  summary["q_source"] = q_source;
  summary["restrict_delta"] = restrict_delta ? json(*restrict_delta) : json(nullptr);
  summary["limit"] = limit_spec_json(spec);
  summary["comparison"] = to_json(report);
  return summary;
}

json run_diagnose(const Context& ctx) {
  const KernelSpec k = kernel_of(ctx.config);
  const Section s = section(ctx);
  const double alpha = alpha_of(ctx.config, k);
  DiagnosticOptions o;
  o.tolerance = s.number("tolerance", o.tolerance);
  o.level = s.number("level", o.level);
  o.t_grid = s.numbers("t_grid", o.t_grid);
  o.m_grid = s.counts("m_grid", o.m_grid);
  o.a = s.number("a", o.a);
  o.delta = s.number("delta", o.delta);
  o.delta_grid = s.numbers("delta_grid", o.delta_grid);
  o.m0 = s.count("m0", o.m0, 0);
  if (s.has("m0_prime")) o.m0_prime = s.count("m0_prime", o.m0, 0);
  o.eta_grid = s.numbers("eta_grid", o.eta_grid);
  o.n_reps = s.count("n_reps", o.n_reps);
  o.reps_per_unit_t = s.count("reps_per_unit_t", o.reps_per_unit_t);
  o.batch = s.count("batch", o.batch);
  o.step_cap = s.count("step_cap", o.step_cap);
  o.joint_m = s.count("joint_m", o.joint_m);
  o.joint_reps = s.count("joint_reps", o.joint_reps);
  const Rng rng(ctx.seed);
  Rng r0 = rng.split(0);
  const ScalingFunction b = ScalingFunction::for_law(k.h_return, alpha, r0);

  ctx.progress("running condition checkers on " + k.name);
  Rng r1 = rng.split(1);
  const auto reports = run_diagnostics(k, b, o, r1);

  std::string csv = csv_row({"condition", "label", "t", "m", "a", "delta", "eta", "t_scaled", "estimate", "lo", "hi",
                             "reference", "unresolved"});
  json rows = json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    rows.push_back(to_json(r));
    all_pass = all_pass && r.verdict == Verdict::pass;
    for (const auto& e : r.estimates) {
      csv += csv_row({std::string(to_string(r.id)), e.label, num(e.t), num(e.m), num(e.a), num(e.delta), num(e.eta),
                      e.t_scaled ? "1" : "0", num(e.estimate.value), num(e.estimate.lo), num(e.estimate.hi),
                      e.reference ? num(e.reference->value) : "", num(e.unresolved)});
    }
  }
  ctx.out->write("conditions.csv", csv);

  json summary = base_summary(ctx, k);
  summary["alpha"] = alpha;
  summary["options"] = {{"tolerance", o.tolerance},
                        {"level", o.level},
                        {"t_grid", o.t_grid},
                        {"m_grid", o.m_grid},
                        {"a", o.a},
                        {"delta", o.delta},
                        {"delta_grid", o.delta_grid},
                        {"m0", o.m0},
                        {"m0_prime", o.m0_prime.value_or(o.m0)},
                        {"eta_grid", o.eta_grid},
                        {"n_reps", o.n_reps},
                        {"reps_per_unit_t", o.reps_per_unit_t},
                        {"step_cap", o.step_cap},
                        {"joint_m", o.joint_m},
                        {"joint_reps", o.joint_reps}};
  summary["reports"] = rows;
  summary["all_pass"] = all_pass;
  return summary;
}

json kernel_catalog() {
  json out = json::array();
  for (const auto& info : list_builtin_kernels()) {
    out.push_back({{"name", info.name},
                   {"summary", info.summary},
                   {"defaults", info.parameters},
                   {"note", info.note},
                   {"spec", to_json(builtin_kernel(info.name))}});
  }
  return out;
}

void print_kernels(std::ostream& os) {
  for (const auto& info : list_builtin_kernels()) {
    os << std::left << std::setw(13) << info.name << info.summary << '\n';
    os << std::setw(13) << "" << "defaults: " << info.parameters << '\n';
    if (!info.note.empty()) os << std::setw(13) << "" << "note: " << info.note << '\n';
  }
}

void print_condition_table(std::ostream& os, const json& summary, bool color) {
  auto paint = [&](const std::string& verdict) {
    if (!color) return verdict;
    const char* code = verdict == "pass" ? "\033[32m" : verdict == "fail" ? "\033[31m" : "\033[33m";
    return std::string(code) + verdict + "\033[0m";
  };
  os << "kernel " << summary["kernel"]["name"].get<std::string>() << "\n";
  for (const auto& r : summary["reports"]) {
    const std::string v = r["verdict"].get<std::string>();
    os << "  " << std::left << std::setw(20) << r["condition_id"].get<std::string>() << ' ' << paint(v)
       << std::string(v.size() < 12 ? 12 - v.size() : 1, ' ') << r["rationale"].get<std::string>() << '\n';
  }
}

}  // namespace exlab::cli
