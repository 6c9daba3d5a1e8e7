#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "commands.hpp"
#include "exlab/error.hpp"
#include "exlab/parallel.hpp"

using namespace exlab;
using namespace exlab::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_reps;
  std::string out;
  std::string kernel;
  std::vector<std::string> params;
  std::vector<std::string> sets;
  unsigned threads = 0;
  bool json = false;
  bool quiet = false;
  bool no_color = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config_path, "JSON configuration file");
  app->add_option("--seed", f.seed, "Master seed (falls back to config, then EXLAB_SEED, then 1)");
  app->add_option("--n", f.n, "Path length");
  app->add_option("--n-reps", f.n_reps, "Monte Carlo replicates");
  app->add_option("-o,--out", f.out, "Output directory");
  app->add_option("-k,--kernel", f.kernel, "Builtin kernel name");
  app->add_option("--param", f.params, "Builtin kernel parameter, key=value (repeatable)");
  app->add_option("--set", f.sets, "Config override, dotted.path=json (repeatable)");
  app->add_option("--threads", f.threads, "Worker threads (results do not depend on this)");
  app->add_flag("--json", f.json, "Print the summary as JSON on stdout");
  app->add_flag("-q,--quiet", f.quiet, "No progress on stderr");
  app->add_flag("--no-color", f.no_color, "Plain text tables");
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument(std::string(flag) + ": expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: " + path + ": " + e.what());
  }
}

/// File, then --set, then the dedicated flags, then the seed fallback chain.
json resolve_config(const Flags& f) {
  json config = load_config(f.config_path);
  if (!config.is_object()) throw InvalidArgument("config: must be a JSON object");
  for (const auto& s : f.sets) {
    const auto [path, value] = split_assignment(s, "--set");
    json* node = &config;
    std::stringstream parts(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(parts, key, '.')) keys.push_back(key);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i].empty()) throw InvalidArgument("--set: empty path component in '" + path + "'");
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw InvalidArgument("--set: '" + path + "' runs through a non-object");
      node = &(*node)[keys[i]];
    }
    *node = parse_value(value);
  }
  if (!f.kernel.empty()) config["kernel"] = f.kernel;
  if (!f.params.empty()) {
    json& k = config["kernel"];
    if (k.is_string()) k = json{{"builtin", k}};
    if (!k.is_object() || !k.contains("builtin")) throw InvalidArgument("--param: needs a builtin kernel");
    for (const auto& p : f.params) {
      const auto [key, value] = split_assignment(p, "--param");
      k["params"][key] = parse_value(value);
    }
  }
  if (f.n) config["n"] = *f.n;
  if (f.n_reps) config["n_reps"] = *f.n_reps;
  if (!f.out.empty()) config["output_dir"] = f.out;
  if (f.seed) {
    config["seed"] = *f.seed;
  } else if (!config.contains("seed")) {
    std::uint64_t seed = 1;
    if (const char* env = std::getenv("EXLAB_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw InvalidArgument(std::string("EXLAB_SEED: not a non-negative integer: '") + env + "'");
      }
    }
    config["seed"] = seed;
  }
  return config;
}

json manifest_meta(const std::string& command, const json& config, const std::string& status) {
  return {{"tool", "exlab"},
          {"command", command},
          {"status", status},
          {"spec_version", kSpecVersion},
          {"seed", config.at("seed")},
          {"config_sha256", sha256_hex(pretty(config))},
          {"build", {{"compiler", __VERSION__}, {"cxx", static_cast<long>(__cplusplus)}}}};
}

int run_command(const std::string& command, const Flags& f) {
  json config;
  try {
    config = resolve_config(f);
    validate_config(command, config);
  } catch (const InvalidArgument& e) {
    std::cerr << "exlab " << command << ": config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (f.threads > 0) set_threads(f.threads);

  const std::string dir = config.value("output_dir", "exlab-out/" + command);
  config.erase("output_dir");  // keeps replays into other directories byte-identical
  OutputDir out(dir);
  Context ctx;
  ctx.command = command;
  ctx.config = config;
  ctx.seed = config.at("seed").get<std::uint64_t>();
  ctx.quiet = f.quiet;
  ctx.out = &out;

  using Runner = json (*)(const Context&);
  static const std::map<std::string, Runner> runners{
      {"simulate", run_simulate},         {"tailchain", run_tailchain}, {"cycles", run_cycles},
      {"limit-sample", run_limit_sample}, {"converge", run_converge},   {"diagnose", run_diagnose}};

  try {
    out.write_json("config.json", config);
    const json summary = runners.at(command)(ctx);
    out.write_json("summary.json", summary);
    out.write_manifest(manifest_meta(command, config, "ok"));
    if (f.json) {
      std::cout << pretty(summary);
    } else if (command == "diagnose") {
      print_condition_table(std::cout, summary, !f.no_color && isatty(STDOUT_FILENO));
    } else {
      std::cout << "exlab " << command << ": wrote " << out.root().string() << "\n";
    }
    return kExitOk;
  } catch (const InvalidArgument& e) {
    std::cerr << "exlab " << command << ": config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GuardTripped& e) {
    std::cerr << "exlab " << command << ": guard tripped: " << e.what() << "\n";
    out.write_json("diagnostic.json", {{"command", command}, {"error", "guard_tripped"}, {"message", e.what()}});
    out.write_manifest(manifest_meta(command, config, "guard_tripped"));
    return kExitGuard;
  } catch (const EstimationError& e) {
    std::cerr << "exlab " << command << ": estimation failed: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed Markov chains with an atom: simulation, limits and diagnostics", "exlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "exlab 0.1.0");

  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Simulate one path of the chain"},
      {"tailchain", "Tail-chain constants c, theta and sup exceedances"},
      {"cycles", "Regenerative cycles, cycle-maximum tail fit and maximum law"},
      {"limit-sample", "Sample the cluster point-process limit"},
      {"converge", "Compare exceedance point processes with the limit"},
      {"diagnose", "Check the sufficient conditions on a kernel"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

  bool kernels_json = false;
  auto* kernels = app.add_subcommand("kernels", "List builtin kernels");
  kernels->add_flag("--json", kernels_json, "Print the catalog as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (kernels->parsed()) {
    if (kernels_json) {
      std::cout << pretty(kernel_catalog());
    } else {
      print_kernels(std::cout);
    }
    return kExitOk;
  }
  try {
    return run_command(app.get_subcommands().front()->get_name(), flags);
  } catch (const InvalidArgument& e) {
    std::cerr << "exlab: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GuardTripped& e) {
    std::cerr << "exlab: guard tripped: " << e.what() << "\n";
    return kExitGuard;
  } catch (const std::exception& e) {
    std::cerr << "exlab: " << e.what() << "\n";
    return kExitFailed;
  }
}
