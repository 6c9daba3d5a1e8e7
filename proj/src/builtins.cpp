#include "exlab/builtins.hpp"

#include <cmath>

#include "exlab/error.hpp"

namespace exlab {

std::vector<BuiltinInfo> list_builtin_kernels() {
  return {
      {"ar1", "Z = rho, phi(x, W) = W with W = noise_scale * Pareto(alpha + 1), H = Pareto(alpha)",
       "alpha=1, rho=0.5, noise_scale=0.1, atom_upper=1", ""},
      {"det-contract", "Z = rho, phi = 0, H = Pareto(alpha)", "alpha=1, rho=0.5, atom_upper=1", ""},
      {"geo-kill", "Z = 0 with probability p0, else 1; phi = 0, H = Pareto(alpha)", "alpha=1, p0=0.3, atom_upper=1",
       "cluster lengths Geometric(p0)"},
      {"logn-drift", "Z lognormal(mu, sigma) with E log Z = mu < 0, phi = 0, H = Pareto(alpha)",
       "alpha=2, mu=-0.5, sigma=0.5, atom_upper=1", ""},
      {"const-fail", "Z = 1, phi = 0, H = Pareto(alpha)", "alpha=1, atom_upper=1",
       "violates Condition drift_back (no drift back to the atom)"},
  };
}

namespace {

KernelSpec base(std::string name, double alpha, const BuiltinParams& p) {
  require(alpha > 0.0, "builtin kernel: alpha must be positive");
  KernelSpec k;
  k.name = std::move(name);
  k.atom_upper = p.atom_upper.value_or(1.0);
  k.h_return = TailDistribution::pareto(alpha, 1.0);
  return k;
}

}  // namespace

KernelSpec builtin_kernel(std::string_view name, const BuiltinParams& p) {
  if (name == "det-contract") {
    KernelSpec k = base("det-contract", p.alpha.value_or(1.0), p);
    k.z_law = TailDistribution::point(p.rho.value_or(0.5));
    k.validate();
    return k;
  }
  if (name == "ar1") {
    const double alpha = p.alpha.value_or(1.0);
    KernelSpec k = base("ar1", alpha, p);
    k.z_law = TailDistribution::point(p.rho.value_or(0.5));
    k.phi = Perturbation::additive(TailDistribution::pareto(alpha + 1.0, p.noise_scale.value_or(0.1)));
    k.validate();
    return k;
  }
  if (name == "geo-kill") {
    KernelSpec k = base("geo-kill", p.alpha.value_or(1.0), p);
    const double p0 = p.p0.value_or(0.3);
    require(p0 > 0.0 && p0 <= 1.0, "geo-kill: p0 must lie in (0, 1]");
    k.z_law = TailDistribution::mixture(p0, TailDistribution::point(1.0));
    k.validate();
    return k;
  }
  if (name == "logn-drift") {
    KernelSpec k = base("logn-drift", p.alpha.value_or(2.0), p);
    k.z_law = TailDistribution::lognormal(p.mu.value_or(-0.5), p.sigma.value_or(0.5));
    k.validate();
    return k;
  }
  if (name == "const-fail") {
    KernelSpec k = base("const-fail", p.alpha.value_or(1.0), p);
    k.z_law = TailDistribution::point(1.0);
    k.validate();
    return k;
  }
  throw InvalidArgument("unknown builtin kernel '" + std::string(name) + "'");
}

std::optional<double> kernel_alpha(const KernelSpec& kernel) { return kernel.h_return.alpha(); }

std::optional<double> analytic_q(const KernelSpec& k) {
  if (k.phi.kind != Perturbation::Kind::zero) return std::nullopt;
  if (k.h_return.family() != Family::pareto || k.h_return.param_scale() < k.atom_upper) return std::nullopt;
  // X_0 > atom_upper a.s. (up to a null set), so every cycle leaves the atom.
  const double alpha = k.h_return.param_alpha();
  const double s = k.h_return.param_scale();
  if (k.z_law.is_deterministic()) {
    const double rho = k.z_law.param_value();
    if (rho <= 0.0) return 2.0;
    if (rho >= 1.0) return std::nullopt;
    if (s != k.atom_upper) return std::nullopt;
    // tau_A = ceil(log(X_0/a) / log(1/rho)), log(X_0/a) ~ Exp(alpha).
    return 1.0 + 1.0 / (1.0 - std::pow(rho, alpha));
  }
  if (k.z_law.family() == Family::mixture_with_point_mass_at_zero && k.z_law.base().is_deterministic() &&
      k.z_law.base().param_value() == 1.0) {
    return 1.0 + 1.0 / k.z_law.param_p0();
  }
  return std::nullopt;
}

}  // namespace exlab
