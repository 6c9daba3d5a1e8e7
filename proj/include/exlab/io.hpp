#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "exlab/cycles.hpp"
#include "exlab/diagnostics.hpp"
#include "exlab/distribution.hpp"
#include "exlab/kernel.hpp"
#include "exlab/point_process.hpp"
#include "exlab/tail_chain.hpp"

namespace exlab {

using json = nlohmann::json;

inline constexpr int kSpecVersion = 1;

/// {"family": ..., "params": {...}}
json to_json(const TailDistribution& d);
TailDistribution distribution_from_json(const json& j);

/// {"spec_version": 1, "name", "z_law", "phi", "atom_upper", "h_return", "boundary"}
/// or {"builtin": name, "params": {...}}. Custom boundary hooks are not
/// serializable.
json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const json& j);

json to_json(const Estimate& e);
json to_json(const SupStatistics& s);
json to_json(const LimitConstants& c);
json to_json(const ConditionReport& r);
json to_json(const ComparisonReport& r);
json to_json(const MaxLawReport& r);
json to_json(const std::vector<TailFitAtT>& fits);
json to_json(const TransienceReport& r);
json to_json(const ClusterSizes& s);

/// Shortest round-trip decimal form.
std::string format_double(double v);

void write_path_csv(std::ostream& os, const ChainPath& path);
void write_cycles_csv(std::ostream& os, const CycleDecomposition& d);
/// time, mark, stack_id (stack_id column only for limit patterns).
void write_pattern_csv(std::ostream& os, const PointPattern& p);
void write_stacks_csv(std::ostream& os, const std::vector<ClusterStack>& stacks);

}  // namespace exlab
