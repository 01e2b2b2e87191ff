#pragma once

#include <functional>
#include <vector>

#include "swocp/mode_sequence.hpp"
#include "swocp/ocp.hpp"

namespace swocp::sim {

/// Continuous control signal for the switched system; may be empty when the
/// problem has no continuous control.
using ControlSignal = std::function<Vector(double t)>;

struct RolloutResult {
  std::vector<double> times;
  Matrix states;  // rows follow `times`
  double running_cost = 0.0;
  double terminal_cost = 0.0;
  Vector final_state;
  bool diverged = false;  // non-finite state encountered; samples are partial

  double total_cost() const { return running_cost + terminal_cost; }
};

/// Classical RK4 on [seq.t0, seq.tf] under the switched dynamics. Step
/// boundaries are aligned to every switch instant, so no step straddles a
/// switch. The running cost is integrated as an extra state.
RolloutResult rollout_switched(const SwitchedProblem& problem, const ModeSequence& seq,
                               const ControlSignal& control = {}, int steps_per_unit_time = 1000);

/// RK4 under the embedded dynamics with u0, u1, vbar interpolated
/// piecewise-linearly from `controls`; steps are aligned to its grid. The
/// running cost includes the auxiliary cost.
RolloutResult rollout_embedded(const EmbeddedProblem& problem, const Trajectory& controls,
                               int steps_per_unit_time = 1000);

}  // namespace swocp::sim
