#include "swocp/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "swocp/numdiff.hpp"

namespace swocp {
namespace {

constexpr double kVbarTolerance = 1e-9;

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

Vector stack(const Vector& x, const Vector& u) {
  Vector xu(x.size() + u.size());
  xu << x, u;
  return xu;
}

}  // namespace

SwitchedProblem::SwitchedProblem(std::string name, int state_dim, int control_dim,
                                 std::array<Mode, 2> modes, BoundarySpec boundary,
                                 ControlSet control_set, double dwell_time,
                                 TerminalCost terminal_cost, std::optional<StateBox> state_box)
    : name_(std::move(name)),
      state_dim_(state_dim),
      control_dim_(control_dim),
      modes_(std::move(modes)),
      boundary_(std::move(boundary)),
      control_set_(std::move(control_set)),
      dwell_time_(dwell_time),
      terminal_cost_(std::move(terminal_cost)),
      state_box_(std::move(state_box)) {
  require(state_dim_ > 0, "state_dim must be positive");
  require(control_dim_ >= 0, "control_dim must be non-negative");
  for (const Mode& m : modes_) {
    require(static_cast<bool>(m.dynamics), "every mode needs a vector field");
    require(static_cast<bool>(m.running_cost), "every mode needs a running cost");
  }
  require(boundary_.tf > boundary_.t0, "boundary: tf must exceed t0");
  require(boundary_.x0.size() == state_dim_, "boundary: x0 has wrong dimension");
  require(boundary_.xf_lower.size() == state_dim_ && boundary_.xf_upper.size() == state_dim_,
          "boundary: final box has wrong dimension");
  require((boundary_.xf_lower.array() <= boundary_.xf_upper.array()).all(),
          "boundary: xf_lower must not exceed xf_upper");
  require(control_set_.lower.size() == control_dim_ && control_set_.upper.size() == control_dim_,
          "control set has wrong dimension");
  require(control_set_.lower.allFinite() && control_set_.upper.allFinite(),
          "control set bounds must be finite");
  require((control_set_.lower.array() <= control_set_.upper.array()).all(),
          "control set: lower must not exceed upper");
  require(dwell_time_ >= 0.0, "dwell time must be non-negative");
  if (state_box_) {
    require(state_box_->lower.size() == state_dim_ && state_box_->upper.size() == state_dim_,
            "state box has wrong dimension");
    require((state_box_->lower.array() <= state_box_->upper.array()).all(),
            "state box: lower must not exceed upper");
  }
}

SwitchedProblem& SwitchedProblem::set_nominal_beta(double beta) {
  require(beta >= 0.0, "beta must be non-negative");
  nominal_beta_ = beta;
  return *this;
}

Vector SwitchedProblem::dynamics(int mode, double t, const Vector& x, const Vector& u) const {
  Vector dx = modes_.at(static_cast<std::size_t>(mode)).dynamics(t, x, u);
  if (dx.size() != state_dim_) throw std::logic_error("vector field returned wrong dimension");
  return dx;
}

double SwitchedProblem::running_cost(int mode, double t, const Vector& x, const Vector& u) const {
  return modes_.at(static_cast<std::size_t>(mode)).running_cost(t, x, u);
}

double SwitchedProblem::terminal_cost(double t0, const Vector& x0, double tf,
                                      const Vector& xf) const {
  return terminal_cost_ ? terminal_cost_(t0, x0, tf, xf) : 0.0;
}

FieldJacobian SwitchedProblem::dynamics_jacobian(int mode, double t, const Vector& x,
                                                 const Vector& u) const {
  const Mode& m = modes_.at(static_cast<std::size_t>(mode));
  if (m.dynamics_jacobian) return m.dynamics_jacobian(t, x, u);
  const auto n = x.size();
  const Matrix jac = numdiff::jacobian(
      [&](const Vector& xu) { return m.dynamics(t, xu.head(n), xu.tail(u.size())); },
      stack(x, u), n);
  return {jac.leftCols(n), jac.rightCols(u.size())};
}

CostGradient SwitchedProblem::running_cost_gradient(int mode, double t, const Vector& x,
                                                    const Vector& u) const {
  const Mode& m = modes_.at(static_cast<std::size_t>(mode));
  if (m.running_cost_gradient) return m.running_cost_gradient(t, x, u);
  const auto n = x.size();
  const Vector g = numdiff::gradient(
      [&](const Vector& xu) { return m.running_cost(t, xu.head(n), xu.tail(u.size())); },
      stack(x, u));
  return {g.head(n), g.tail(u.size())};
}

double SwitchedProblem::final_box_violation(const Vector& xf) const {
  double worst = 0.0;
  for (int i = 0; i < state_dim_; ++i) {
    worst = std::max(worst, boundary_.xf_lower[i] - xf[i]);
    worst = std::max(worst, xf[i] - boundary_.xf_upper[i]);
  }
  return worst;
}

double aux_cost(double vbar, double beta) {
  if (vbar < -kVbarTolerance || vbar > 1.0 + kVbarTolerance) {
    throw std::domain_error("aux_cost: mode signal outside [0,1]");
  }
  return 4.0 * beta * (vbar - vbar * vbar);
}

double aux_cost_derivative(double vbar, double beta) { return 4.0 * beta * (1.0 - 2.0 * vbar); }

EmbeddedProblem::EmbeddedProblem(SwitchedProblem base, double beta)
    : base_(std::move(base)), beta_(beta) {
  require(beta_ >= 0.0, "beta must be non-negative");
}

Vector EmbeddedProblem::dynamics(double t, const Vector& x, const Vector& u0, const Vector& u1,
                                 double vbar) const {
  return (1.0 - vbar) * base_.dynamics(0, t, x, u0) + vbar * base_.dynamics(1, t, x, u1);
}

double EmbeddedProblem::running_cost(double t, const Vector& x, const Vector& u0,
                                     const Vector& u1, double vbar) const {
  return (1.0 - vbar) * base_.running_cost(0, t, x, u0) +
         vbar * base_.running_cost(1, t, x, u1) + 4.0 * beta_ * (vbar - vbar * vbar);
}

EmbeddedDerivatives EmbeddedProblem::derivatives(double t, const Vector& x, const Vector& u0,
                                                 const Vector& u1, double vbar) const {
  const int n = state_dim();
  const int m = control_dim();
  const FieldJacobian j0 = base_.dynamics_jacobian(0, t, x, u0);
  const FieldJacobian j1 = base_.dynamics_jacobian(1, t, x, u1);
  const CostGradient g0 = base_.running_cost_gradient(0, t, x, u0);
  const CostGradient g1 = base_.running_cost_gradient(1, t, x, u1);

  EmbeddedDerivatives d{Matrix::Zero(n, node_width()), Vector::Zero(node_width())};
  d.dynamics.leftCols(n) = (1.0 - vbar) * j0.dx + vbar * j1.dx;
  d.dynamics.middleCols(n, m) = (1.0 - vbar) * j0.du;
  d.dynamics.middleCols(n + m, m) = vbar * j1.du;
  d.dynamics.col(n + 2 * m) = base_.dynamics(1, t, x, u1) - base_.dynamics(0, t, x, u0);

  d.cost.head(n) = (1.0 - vbar) * g0.dx + vbar * g1.dx;
  d.cost.segment(n, m) = (1.0 - vbar) * g0.du;
  d.cost.segment(n + m, m) = vbar * g1.du;
  d.cost[n + 2 * m] = base_.running_cost(1, t, x, u1) - base_.running_cost(0, t, x, u0) +
                      aux_cost_derivative(vbar, beta_);
  return d;
}

EmbeddedProblem embed(const SwitchedProblem& problem, double beta) {
  return EmbeddedProblem(problem, beta);
}

double hamiltonian(const EmbeddedProblem& problem, double t, const Vector& x,
                   const Vector& lambda, const Vector& u0, const Vector& u1, double vbar) {
  const int n = problem.state_dim();
  const int m = problem.control_dim();
  if (x.size() != n || lambda.size() != n || u0.size() != m || u1.size() != m) {
    throw std::invalid_argument("hamiltonian: dimension mismatch");
  }
  return lambda.dot(problem.dynamics(t, x, u0, u1, vbar)) +
         problem.running_cost(t, x, u0, u1, vbar);
}

Trajectory::Sample Trajectory::interpolate(double t) const {
  const int last = num_nodes() - 1;
  if (last < 0) throw std::logic_error("interpolate on empty trajectory");
  if (last == 0 || t <= times.front()) {
    return {states.row(0).transpose(), controls_u0.row(0).transpose(),
            controls_u1.row(0).transpose(), mode_signal[0]};
  }
  if (t >= times.back()) {
    return {states.row(last).transpose(), controls_u0.row(last).transpose(),
            controls_u1.row(last).transpose(), mode_signal[last]};
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const int k = static_cast<int>(it - times.begin()) - 1;
  const double s = (t - times[k]) / (times[k + 1] - times[k]);
  auto lerp = [s](const auto& a, const auto& b) { return ((1.0 - s) * a + s * b).eval(); };
  return {lerp(states.row(k), states.row(k + 1)).transpose(),
          lerp(controls_u0.row(k), controls_u0.row(k + 1)).transpose(),
          lerp(controls_u1.row(k), controls_u1.row(k + 1)).transpose(),
          (1.0 - s) * mode_signal[k] + s * mode_signal[k + 1]};
}

}  // namespace swocp
