#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "swocp/cli/config.hpp"

namespace swocp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitSolve = 2,
  kExitAudit = 3,
};

/// Files written into the output directory:
///   trajectory.csv, modes.csv, summary.txt, states.svg, mode_signal.svg
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);

/// sweep.csv and objective_vs_beta.svg in the output directory. With one
/// beta the solve outputs go alongside; with several, each beta gets a
/// beta_<value> subdirectory.
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

struct AuditResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Finite-difference gradient and Jacobian audits at random feasible
/// points, Hamiltonian curvature in the mode signal, and the integrator's
/// convergence order.
std::vector<AuditResult> run_audits(const RunConfig& config);

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace swocp::cli
