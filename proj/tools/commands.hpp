#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "exlab/io.hpp"
#include "output.hpp"

namespace exlab::cli {

/// Everything a subcommand needs once the configuration is resolved.
struct Context {
  std::string command;
  json config;  // resolved: file, then flags, then seed fallback
  std::uint64_t seed = 0;
  bool quiet = false;
  OutputDir* out = nullptr;

  void progress(const std::string& message) const;
};

/// Top-level configuration keys; anything else is a schema error.
const std::vector<std::string>& top_level_keys();

/// Checks the shared keys (n, n_reps, level, seed, kernel, ...) and the
/// section of the running command. Throws InvalidArgument.
void validate_config(const std::string& command, const json& config);

json run_simulate(const Context& ctx);
json run_tailchain(const Context& ctx);
json run_cycles(const Context& ctx);
json run_limit_sample(const Context& ctx);
json run_converge(const Context& ctx);
json run_diagnose(const Context& ctx);

json kernel_catalog();
void print_kernels(std::ostream& os);

/// Human-readable verdict table for a diagnose summary.
void print_condition_table(std::ostream& os, const json& summary, bool color);

}  // namespace exlab::cli
