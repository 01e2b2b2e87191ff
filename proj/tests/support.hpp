#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>

#include "swocp/ocp.hpp"
#include "swocp/transcription.hpp"

namespace swocp::testing {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Perturbs the default initializer inside the bounds. States stay at least
// `state_margin` above a finite lower bound.
inline Vector random_feasible(const Transcription& tr, std::mt19937& rng,
                              double state_margin = 0.1) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Vector lo = tr.lower_bounds();
  const Vector hi = tr.upper_bounds();
  const DecisionLayout& layout = tr.layout();
  const int state_entries = layout.num_nodes() * layout.state_dim();
  Vector z = default_initializer(tr.problem(), tr.mesh());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (lo[i] == hi[i]) continue;
    double a = lo[i];
    if (std::isfinite(a) && i < state_entries) a += state_margin;
    z[i] = std::clamp(z[i] + 0.4 * unit(rng), a, hi[i]);
  }
  for (int k = 0; k < layout.num_nodes(); ++k) z[layout.mode(k)] = 0.5 * (1.0 + unit(rng));
  return z;
}

// Closed-form optimum of the double integrator: u = -1 on [0,1), +1 after.
inline Vector double_integrator_state(double t) {
  if (t <= 1.0) return vec({1.0 - 0.5 * t * t, -t});
  const double s = 2.0 - t;
  return vec({0.5 * s * s, -s});
}

inline Trajectory double_integrator_optimum(const std::vector<double>& grid) {
  const auto nodes = static_cast<Eigen::Index>(grid.size());
  Trajectory tr;
  tr.times = grid;
  tr.states = Matrix(nodes, 2);
  tr.controls_u0 = Matrix(nodes, 0);
  tr.controls_u1 = Matrix(nodes, 0);
  tr.mode_signal = Vector(nodes);
  for (Eigen::Index k = 0; k < nodes; ++k) {
    const double t = grid[static_cast<std::size_t>(k)];
    tr.states.row(k) = double_integrator_state(t).transpose();
    tr.mode_signal[k] = t < 1.0 ? 0.0 : 1.0;
  }
  return tr;
}

// Trajectory with no states of interest, only a mode signal.
inline Trajectory signal_only(const std::vector<double>& times, const Vector& vbar) {
  const auto nodes = static_cast<Eigen::Index>(times.size());
  Trajectory tr;
  tr.times = times;
  tr.states = Matrix::Zero(nodes, 1);
  tr.controls_u0 = Matrix(nodes, 0);
  tr.controls_u1 = Matrix(nodes, 0);
  tr.mode_signal = vbar;
  return tr;
}

inline std::vector<double> uniform_times(double t0, double tf, int intervals) {
  return Mesh::uniform(t0, tf, intervals).grid;
}

}  // namespace swocp::testing
