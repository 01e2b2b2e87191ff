#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace swocp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Partial derivatives of a vector field (or cost) with respect to state and
/// control at a single point.
struct FieldJacobian {
  Matrix dx;  // n x n
  Matrix du;  // n x m
};

struct CostGradient {
  Vector dx;  // n
  Vector du;  // m
};

using VectorField = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using VectorFieldJacobian =
    std::function<FieldJacobian(double t, const Vector& x, const Vector& u)>;
using RunningCost = std::function<double(double t, const Vector& x, const Vector& u)>;
using RunningCostGradient =
    std::function<CostGradient(double t, const Vector& x, const Vector& u)>;
using TerminalCost =
    std::function<double(double t0, const Vector& x0, double tf, const Vector& xf)>;

/// One subsystem of a switched system. The derivative callbacks are optional;
/// when absent, consumers fall back to central differences.
struct Mode {
  VectorField dynamics;
  RunningCost running_cost;
  VectorFieldJacobian dynamics_jacobian;
  RunningCostGradient running_cost_gradient;
};

/// Compact box of admissible controls, shared by both modes.
struct ControlSet {
  Vector lower;
  Vector upper;

  Vector midpoint() const { return 0.5 * (lower + upper); }
};

/// Fixed initial time/state, fixed final time, box on the final state.
struct BoundarySpec {
  double t0 = 0.0;
  double tf = 1.0;
  Vector x0;
  Vector xf_lower;
  Vector xf_upper;
};

/// Simple box on the state along the whole horizon. Only used to tighten
/// transcription bounds (e.g. non-negative water levels).
struct StateBox {
  Vector lower;
  Vector upper;
};

class SwitchedProblem {
 public:
  SwitchedProblem(std::string name, int state_dim, int control_dim, std::array<Mode, 2> modes,
                  BoundarySpec boundary, ControlSet control_set, double dwell_time = 0.0,
                  TerminalCost terminal_cost = {}, std::optional<StateBox> state_box = {});

  const std::string& name() const { return name_; }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  const Mode& mode(int i) const { return modes_.at(static_cast<std::size_t>(i)); }
  const BoundarySpec& boundary() const { return boundary_; }
  const ControlSet& control_set() const { return control_set_; }
  double dwell_time() const { return dwell_time_; }
  const std::optional<StateBox>& state_box() const { return state_box_; }

  /// Auxiliary-cost weight the problem was published with; the embedding
  /// pipeline uses it when no weight is given explicitly.
  double nominal_beta() const { return nominal_beta_; }
  SwitchedProblem& set_nominal_beta(double beta);

  Vector dynamics(int mode, double t, const Vector& x, const Vector& u) const;
  double running_cost(int mode, double t, const Vector& x, const Vector& u) const;
  double terminal_cost(double t0, const Vector& x0, double tf, const Vector& xf) const;
  bool has_terminal_cost() const { return static_cast<bool>(terminal_cost_); }

  FieldJacobian dynamics_jacobian(int mode, double t, const Vector& x, const Vector& u) const;
  CostGradient running_cost_gradient(int mode, double t, const Vector& x, const Vector& u) const;

  /// Max componentwise distance of `xf` outside the final-state box.
  double final_box_violation(const Vector& xf) const;

 private:
  std::string name_;
  int state_dim_;
  int control_dim_;
  std::array<Mode, 2> modes_;
  BoundarySpec boundary_;
  ControlSet control_set_;
  double dwell_time_;
  TerminalCost terminal_cost_;
  std::optional<StateBox> state_box_;
  double nominal_beta_ = 0.0;
};

/// Concave switching penalty 4*beta*(vbar - vbar^2). Zero at the binary
/// values, peak value beta at vbar = 0.5.
double aux_cost(double vbar, double beta);
double aux_cost_derivative(double vbar, double beta);

/// Derivatives of the embedded dynamics/cost with respect to the stacked
/// node variables q = [x, u0, u1, vbar].
struct EmbeddedDerivatives {
  Matrix dynamics;  // n x (n + 2m + 1)
  Vector cost;      // n + 2m + 1
};

/// Relaxation of a switched problem: the binary mode is replaced by
/// vbar in [0,1] and the auxiliary cost weighted by beta is added.
class EmbeddedProblem {
 public:
  EmbeddedProblem(SwitchedProblem base, double beta);

  const SwitchedProblem& base() const { return base_; }
  double beta() const { return beta_; }
  int state_dim() const { return base_.state_dim(); }
  int control_dim() const { return base_.control_dim(); }
  /// Width of the stacked node variable block [x, u0, u1, vbar].
  int node_width() const { return state_dim() + 2 * control_dim() + 1; }

  Vector dynamics(double t, const Vector& x, const Vector& u0, const Vector& u1,
                  double vbar) const;
  /// Convex combination of the mode costs plus the auxiliary cost.
  double running_cost(double t, const Vector& x, const Vector& u0, const Vector& u1,
                      double vbar) const;
  EmbeddedDerivatives derivatives(double t, const Vector& x, const Vector& u0, const Vector& u1,
                                  double vbar) const;

 private:
  SwitchedProblem base_;
  double beta_;
};

EmbeddedProblem embed(const SwitchedProblem& problem, double beta);

/// <lambda, embedded dynamics> + embedded running cost (including aux cost).
double hamiltonian(const EmbeddedProblem& problem, double t, const Vector& x,
                   const Vector& lambda, const Vector& u0, const Vector& u1, double vbar);

/// Samples of a solution on a time grid; piecewise-linear between samples.
struct Trajectory {
  std::vector<double> times;
  Matrix states;       // (N+1) x n
  Matrix controls_u0;  // (N+1) x m
  Matrix controls_u1;  // (N+1) x m
  Vector mode_signal;  // N+1

  int num_nodes() const { return static_cast<int>(times.size()); }
  double t0() const { return times.front(); }
  double tf() const { return times.back(); }

  struct Sample {
    Vector x;
    Vector u0;
    Vector u1;
    double vbar;
  };
  /// Piecewise-linear interpolation, clamped to the horizon.
  Sample interpolate(double t) const;
};

struct CostateTrajectory {
  std::vector<double> times;
  Matrix costates;  // (N+1) x n
};

}  // namespace swocp
