#pragma once

#include <map>
#include <string>
#include <vector>

#include "swocp/ocp.hpp"

namespace swocp::problems {

/// Valve feeding a tank that drains into a second tank. Mode 0 is the low
/// valve flow (1), mode 1 the high flow (2). Running cost alpha*(x2 - 3)^2,
/// final box x1 in [0,4], x2 = 3. Water levels are clamped at zero before
/// taking square roots.
SwitchedProblem two_tank(double alpha = 2.0, double t0 = 0.0, double tf = 20.0,
                         const Vector& x0 = Vector::Constant(2, 2.0));

/// Double integrator with u in [-1, 1], carried through the embedded
/// pipeline as two bang modes u = -1 (mode 0) and u = +1 (mode 1), so that
/// u = 2*vbar - 1 and beta*(1 - u^2) equals the auxiliary cost 4*beta*(vbar - vbar^2).
/// Running cost x1^2; x(t0) = [1, 0], x(tf) = [0, 0].
SwitchedProblem double_integrator(double beta_in_cost = 0.0, double t0 = 0.0, double tf = 2.0);

/// Control value of the double integrator for a given mode signal.
inline double double_integrator_control(double vbar) { return 2.0 * vbar - 1.0; }

/// Parameter overrides keyed by name; scalars are one-element vectors.
using Parameters = std::map<std::string, std::vector<double>>;

/// Registry names: "two-tank", "double-integrator".
std::vector<std::string> names();
SwitchedProblem make(const std::string& name, const Parameters& overrides = {});

}  // namespace swocp::problems
