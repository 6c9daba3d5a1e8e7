// JSON crosses the boundary as text; exlab/__init__.py decodes it.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "exlab/builtins.hpp"
#include "exlab/cycles.hpp"
#include "exlab/diagnostics.hpp"
#include "exlab/error.hpp"
#include "exlab/io.hpp"
#include "exlab/measure_oracle.hpp"
#include "exlab/parallel.hpp"
#include "exlab/point_process.hpp"
#include "exlab/tail_chain.hpp"

namespace py = pybind11;
using namespace exlab;

namespace {

KernelSpec kernel_of(const std::string& text) { return kernel_from_json(json::parse(text)); }

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

}  // namespace

PYBIND11_MODULE(_exlab, m) {
  m.doc() = "Core of exlab: heavy-tailed Markov chains with an atom";

  static py::exception<GuardTripped> guard(m, "GuardTripped", PyExc_RuntimeError);
  static py::exception<EstimationError> estimation(m, "EstimationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const GuardTripped& e) {
      py::set_error(guard, e.what());
    } catch (const EstimationError& e) {
      py::set_error(estimation, e.what());
    } catch (const json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.attr("spec_version") = kSpecVersion;
  m.def("set_threads", &set_threads, py::arg("n"));

  m.def("kernel_catalog", [] {
    json out = json::array();
    for (const auto& info : list_builtin_kernels()) {
      const KernelSpec k = builtin_kernel(info.name);
      const auto q = analytic_q(k);
      out.push_back({{"name", info.name},
                     {"summary", info.summary},
                     {"defaults", info.parameters},
                     {"note", info.note},
                     {"spec", to_json(k)},
                     {"analytic_q", q ? json(*q) : json(nullptr)}});
    }
    return out.dump();
  });

  m.def("resolve_kernel", [](const std::string& text) { return to_json(kernel_of(text)).dump(); });

  m.def(
      "simulate",
      [](const std::string& kernel, std::uint64_t n, std::uint64_t seed, std::optional<double> x0,
         std::uint64_t cycle_cap) {
        Rng rng(seed);
        const InitialState init = x0 ? InitialState::fixed(*x0) : InitialState::from_h();
        ChainPath path;
        {
          py::gil_scoped_release release;
          path = simulate_path(kernel_of(kernel), init, n, rng, cycle_cap);
        }
        return py::make_tuple(to_array(path.states), to_array(path.atom_flags));
      },
      py::arg("kernel"), py::arg("n"), py::arg("seed"), py::arg("x0") = py::none(),
      py::arg("cycle_cap") = kDefaultCycleCap);

  m.def(
      "cycles",
      [](const std::string& kernel, std::uint64_t n, std::uint64_t seed) {
        const KernelSpec k = kernel_of(kernel);
        Rng rng(seed);
        const CycleDecomposition d = decompose(simulate_path(k, InitialState::from_h(), n, rng), k.atom_upper);
        std::vector<double> lengths, maxima;
        for (const auto& c : d.cycles) {
          lengths.push_back(static_cast<double>(c.length));
          maxima.push_back(c.max_value);
        }
        return py::make_tuple(to_json(d.q_hat).dump(), to_array(lengths), to_array(maxima));
      },
      py::arg("kernel"), py::arg("n"), py::arg("seed"));

  m.def(
      "constants",
      [](const std::string& g, double alpha, std::size_t n_reps, std::uint64_t seed, std::optional<double> q) {
        Rng rng(seed);
        LimitConstants c = constant_c(distribution_from_json(json::parse(g)), alpha, {}, n_reps, rng);
        if (q) {
          c.q = Estimate{*q, 0.0, *q, *q, 0};
          fill_extremal_index(c);
        }
        return to_json(c).dump();
      },
      py::arg("g"), py::arg("alpha"), py::arg("n_reps"), py::arg("seed"), py::arg("q") = py::none());

  m.def(
      "sample_limit",
      [](double alpha, double q, const std::string& g, double delta, double s_max, double mark_floor,
         std::uint64_t seed) {
        LimitSpec spec;
        spec.alpha = alpha;
        spec.q = q;
        spec.g = distribution_from_json(json::parse(g));
        spec.delta = delta;
        spec.window = {s_max, mark_floor};
        Rng rng(seed);
        const LimitSample s = sample_limit(spec, rng);
        std::vector<double> times, marks;
        std::vector<std::int64_t> ids;
        for (const auto& p : s.pattern.points) {
          times.push_back(p.time);
          marks.push_back(p.mark);
          ids.push_back(p.stack_id);
        }
        return py::make_tuple(to_array(times), to_array(marks), to_array(ids));
      },
      py::arg("alpha"), py::arg("q"), py::arg("g"), py::arg("delta"), py::arg("s_max") = 1.0,
      py::arg("mark_floor") = 1.0, py::arg("seed") = 1);

  m.def(
      "nu_box",
      [](double alpha, double y_value, double x, double y) {
        return ProductMeasure::deterministic(alpha, y_value).nu_box(x, y);
      },
      py::arg("alpha"), py::arg("y_value"), py::arg("x"), py::arg("y"));

  m.def(
      "diagnose",
      [](const std::string& kernel, std::uint64_t seed) {
        const KernelSpec k = kernel_of(kernel);
        const auto alpha = kernel_alpha(k);
        require(alpha.has_value(), "diagnose: the return law H must be Pareto");
        Rng rng(seed);
        const ScalingFunction b = ScalingFunction::analytic(k.h_return);
        std::vector<ConditionReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_diagnostics(k, b, DiagnosticOptions{}, rng);
        }
        json out = json::array();
        for (const auto& r : reports) out.push_back(to_json(r));
        return out.dump();
      },
      py::arg("kernel"), py::arg("seed"));
}
