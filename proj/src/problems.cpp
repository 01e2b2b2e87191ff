#include "swocp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swocp::problems {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Lower floor for the derivative of sqrt at an empty tank.
constexpr double kSqrtFloor = 1e-12;

double safe_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }
double safe_sqrt_derivative(double v) { return 0.5 / std::sqrt(std::max(v, kSqrtFloor)); }

Mode tank_mode(double inflow, double alpha) {
  Mode mode;
  mode.dynamics = [inflow](double, const Vector& x, const Vector&) {
    Vector dx(2);
    dx << inflow - safe_sqrt(x[0]), safe_sqrt(x[0]) - safe_sqrt(x[1]);
    return dx;
  };
  mode.dynamics_jacobian = [](double, const Vector& x, const Vector&) {
    const double d1 = safe_sqrt_derivative(x[0]);
    const double d2 = safe_sqrt_derivative(x[1]);
    FieldJacobian j{Matrix::Zero(2, 2), Matrix::Zero(2, 0)};
    j.dx << -d1, 0.0, d1, -d2;
    return j;
  };
  mode.running_cost = [alpha](double, const Vector& x, const Vector&) {
    return alpha * (x[1] - 3.0) * (x[1] - 3.0);
  };
  mode.running_cost_gradient = [alpha](double, const Vector& x, const Vector&) {
    CostGradient g{Vector::Zero(2), Vector::Zero(0)};
    g.dx[1] = 2.0 * alpha * (x[1] - 3.0);
    return g;
  };
  return mode;
}

Mode bang_mode(double u) {
  Mode mode;
  mode.dynamics = [u](double, const Vector& x, const Vector&) {
    Vector dx(2);
    dx << x[1], u;
    return dx;
  };
  mode.dynamics_jacobian = [](double, const Vector&, const Vector&) {
    FieldJacobian j{Matrix::Zero(2, 2), Matrix::Zero(2, 0)};
    j.dx(0, 1) = 1.0;
    return j;
  };
  mode.running_cost = [](double, const Vector& x, const Vector&) { return x[0] * x[0]; };
  mode.running_cost_gradient = [](double, const Vector& x, const Vector&) {
    CostGradient g{Vector::Zero(2), Vector::Zero(0)};
    g.dx[0] = 2.0 * x[0];
    return g;
  };
  return mode;
}

double scalar(const Parameters& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw std::invalid_argument("parameter '" + key + "' must be scalar");
  return it->second.front();
}

void reject_unknown(const Parameters& p, const std::vector<std::string>& known) {
  for (const auto& [key, value] : p) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("unknown problem parameter: " + key);
    }
  }
}

}  // namespace

SwitchedProblem two_tank(double alpha, double t0, double tf, const Vector& x0) {
  BoundarySpec boundary;
  boundary.t0 = t0;
  boundary.tf = tf;
  boundary.x0 = x0;
  boundary.xf_lower = Vector(2);
  boundary.xf_upper = Vector(2);
  boundary.xf_lower << 0.0, 3.0;
  boundary.xf_upper << 4.0, 3.0;
  StateBox levels{Vector::Zero(2), Vector::Constant(2, kInf)};
  return SwitchedProblem("two-tank", 2, 0, {tank_mode(1.0, alpha), tank_mode(2.0, alpha)},
                         boundary, ControlSet{Vector(0), Vector(0)}, 0.0, {}, levels);
}

SwitchedProblem double_integrator(double beta_in_cost, double t0, double tf) {
  BoundarySpec boundary;
  boundary.t0 = t0;
  boundary.tf = tf;
  boundary.x0 = Vector(2);
  boundary.x0 << 1.0, 0.0;
  boundary.xf_lower = Vector::Zero(2);
  boundary.xf_upper = Vector::Zero(2);
  SwitchedProblem problem("double-integrator", 2, 0, {bang_mode(-1.0), bang_mode(1.0)}, boundary,
                          ControlSet{Vector(0), Vector(0)});
  problem.set_nominal_beta(beta_in_cost);
  return problem;
}

std::vector<std::string> names() { return {"two-tank", "double-integrator"}; }

SwitchedProblem make(const std::string& name, const Parameters& overrides) {
  if (name == "two-tank") {
    reject_unknown(overrides, {"alpha", "t0", "tf", "x0"});
    Vector x0 = Vector::Constant(2, 2.0);
    if (const auto it = overrides.find("x0"); it != overrides.end()) {
      if (it->second.size() != 2) throw std::invalid_argument("parameter 'x0' needs 2 entries");
      x0 << it->second[0], it->second[1];
    }
    return two_tank(scalar(overrides, "alpha", 2.0), scalar(overrides, "t0", 0.0),
                    scalar(overrides, "tf", 20.0), x0);
  }
  if (name == "double-integrator") {
    reject_unknown(overrides, {"beta_in_cost", "t0", "tf"});
    return double_integrator(scalar(overrides, "beta_in_cost", 0.0),
                             scalar(overrides, "t0", 0.0), scalar(overrides, "tf", 2.0));
  }
  throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace swocp::problems
