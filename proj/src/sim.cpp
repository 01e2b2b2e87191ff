#include "swocp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swocp::sim {
namespace {

// rhs(t, x) -> (xdot, running cost rate) for one smooth segment.
using SegmentRhs = std::function<std::pair<Vector, double>(double, const Vector&)>;

class Integrator {
 public:
  Integrator(double t0, const Vector& x0, int steps_per_unit_time)
      : spu_(steps_per_unit_time), x_(x0) {
    if (spu_ < 1) throw std::invalid_argument("steps_per_unit_time must be positive");
    result_.times.push_back(t0);
    rows_.push_back(x0);
  }

  // Integrates over [a, b] with a uniform step; false once diverged.
  bool segment(double a, double b, const SegmentRhs& rhs) {
    if (result_.diverged) return false;
    if (!(b > a)) return true;
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) * spu_ - 1e-9)));
    const double h = (b - a) / steps;
    for (int i = 0; i < steps; ++i) {
      const double t = a + i * h;
      const auto [k1, c1] = rhs(t, x_);
      const auto [k2, c2] = rhs(t + 0.5 * h, x_ + 0.5 * h * k1);
      const auto [k3, c3] = rhs(t + 0.5 * h, x_ + 0.5 * h * k2);
      const auto [k4, c4] = rhs(t + h, x_ + h * k3);
      x_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      cost_ += (h / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
      const double t_next = (i + 1 == steps) ? b : a + (i + 1) * h;
      if (!x_.allFinite() || !std::isfinite(cost_)) {
        result_.diverged = true;
        return false;
      }
      result_.times.push_back(t_next);
      rows_.push_back(x_);
    }
    return true;
  }

  RolloutResult finish() {
    result_.states.resize(static_cast<Eigen::Index>(rows_.size()), x_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      result_.states.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
    }
    result_.final_state = rows_.back();
    result_.running_cost = cost_;
    return std::move(result_);
  }

 private:
  int spu_;
  Vector x_;
  double cost_ = 0.0;
  std::vector<Vector> rows_;
  RolloutResult result_;
};

}  // namespace

RolloutResult rollout_switched(const SwitchedProblem& problem, const ModeSequence& seq,
                               const ControlSignal& control, int steps_per_unit_time) {
  const Vector x0 = problem.boundary().x0;
  const Vector u_default = problem.control_set().midpoint();
  auto u_at = [&](double t) { return control ? control(t) : u_default; };

  std::vector<double> cuts{seq.t0};
  for (double s : seq.switch_times) cuts.push_back(std::clamp(s, seq.t0, seq.tf));
  cuts.push_back(seq.tf);

  Integrator integrator(seq.t0, x0, steps_per_unit_time);
  int mode = seq.initial_mode;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i, mode = 1 - mode) {
    const SegmentRhs rhs = [&, mode](double t, const Vector& x) {
      const Vector u = u_at(t);
      return std::make_pair(problem.dynamics(mode, t, x, u), problem.running_cost(mode, t, x, u));
    };
    if (!integrator.segment(cuts[i], cuts[i + 1], rhs)) break;
  }
  RolloutResult result = integrator.finish();
  if (!result.diverged) {
    result.terminal_cost = problem.terminal_cost(seq.t0, x0, seq.tf, result.final_state);
  }
  return result;
}

RolloutResult rollout_embedded(const EmbeddedProblem& problem, const Trajectory& controls,
                               int steps_per_unit_time) {
  const SwitchedProblem& base = problem.base();
  const Vector x0 = base.boundary().x0;
  Integrator integrator(controls.t0(), x0, steps_per_unit_time);
  const SegmentRhs rhs = [&](double t, const Vector& x) {
    const Trajectory::Sample s = controls.interpolate(t);
    return std::make_pair(problem.dynamics(t, x, s.u0, s.u1, s.vbar),
                          problem.running_cost(t, x, s.u0, s.u1, s.vbar));
  };
  for (int k = 0; k + 1 < controls.num_nodes(); ++k) {
    if (!integrator.segment(controls.times[k], controls.times[k + 1], rhs)) break;
  }
  RolloutResult result = integrator.finish();
  if (!result.diverged) {
    result.terminal_cost =
        base.terminal_cost(controls.t0(), x0, controls.tf(), result.final_state);
  }
  return result;
}

}  // namespace swocp::sim
