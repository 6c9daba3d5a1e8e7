#pragma once

// Naive reference implementations used as oracles. They share no code with
// the library beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "exlab/kernel.hpp"
#include "exlab/point_process.hpp"

namespace ref {

struct Cycle {
  std::size_t start, length, tau_a, tau_t;
  double max_value, max_extremal, first_state;
};

struct Decomposition {
  Cycle initial;
  std::vector<Cycle> cycles;
  std::vector<std::size_t> renewal_times;
};

inline Cycle build_cycle(const std::vector<double>& xs, std::size_t from, std::size_t to, double threshold) {
  Cycle c{from, to - from + 1, to - from, 0, 0.0, 0.0, xs[from]};
  for (std::size_t j = from; j <= to; ++j) c.max_value = std::max(c.max_value, xs[j]);
  // Downcrossing: rescan from the start for the first state at or below the threshold.
  std::size_t tau = 0;
  while (from + tau <= to && !(xs[from + tau] <= threshold)) ++tau;
  c.tau_t = tau;
  for (std::size_t j = 0; j < tau; ++j) c.max_extremal = std::max(c.max_extremal, xs[from + j]);
  return c;
}

/// Quadratic-time decomposition: for each position, rescan the path to
/// decide whether it is the end of a cycle.
inline Decomposition decompose(const std::vector<double>& xs, double atom_upper, double threshold) {
  std::vector<std::size_t> atoms;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool is_atom = false;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (k == i && xs[k] <= atom_upper) is_atom = true;
    }
    if (is_atom) atoms.push_back(i);
  }
  Decomposition d{};
  if (atoms.empty()) return d;
  d.initial = build_cycle(xs, 0, atoms[0], threshold);
  d.renewal_times.push_back(atoms[0] + 1);
  for (std::size_t k = 1; k < atoms.size(); ++k) {
    d.cycles.push_back(build_cycle(xs, atoms[k - 1] + 1, atoms[k], threshold));
    d.renewal_times.push_back(atoms[k] + 1);
  }
  return d;
}

/// Direct count of points in [0, s] x (a, inf], without relying on time order.
inline std::size_t box_count(const std::vector<exlab::Point>& points, double s, double a) {
  std::size_t k = 0;
  for (const auto& p : points) {
    if (p.time <= s && p.mark > a) ++k;
  }
  return k;
}

/// #{j <= s n : X_j > a b_n} straight from the path.
inline std::size_t path_box_count(const std::vector<double>& xs, std::size_t n, double b_n, double s, double a) {
  std::size_t k = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (static_cast<double>(j) <= s * static_cast<double>(n) && xs[j] > a * b_n) ++k;
  }
  return k;
}

}  // namespace ref
