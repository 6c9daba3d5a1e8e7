#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exlab/kernel.hpp"

namespace exlab {

/// Overrides for the built-in kernels; unset fields take each kernel's default.
struct BuiltinParams {
  std::optional<double> alpha;        // tail index of H = Pareto(alpha)
  std::optional<double> rho;          // Z = rho (ar1, det-contract)
  std::optional<double> p0;           // G({0}) (geo-kill)
  std::optional<double> mu;           // log Z ~ N(mu, sigma^2) (logn-drift)
  std::optional<double> sigma;
  std::optional<double> noise_scale;  // W = noise_scale * Pareto(alpha + 1) (ar1)
  std::optional<double> atom_upper;
};

struct BuiltinInfo {
  std::string name;
  std::string summary;
  std::string parameters;
  std::string note;
};

std::vector<BuiltinInfo> list_builtin_kernels();

/// Throws InvalidArgument for unknown names.
KernelSpec builtin_kernel(std::string_view name, const BuiltinParams& params = {});

/// Tail index of the kernel's return law when it is Pareto.
std::optional<double> kernel_alpha(const KernelSpec& kernel);

/// q = E_H tau_A + 1 in closed form for Pareto H with scale >= atom_upper,
/// phi = 0 and Z either a point mass rho < 1 (q = 1 + 1/(1 - rho^alpha)) or
/// 0/1-valued with G({0}) = p0 > 0 (q = 1 + 1/p0). nullopt otherwise.
std::optional<double> analytic_q(const KernelSpec& kernel);

}  // namespace exlab
