#include "swocp/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "swocp/cli/report.hpp"
#include "swocp/sim.hpp"

namespace swocp::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kAuditPoints = 10;
constexpr double kDerivativeTolerance = 1e-5;
constexpr double kCurvatureTolerance = 1e-6;
constexpr double kOrderFactor = 8.0;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

Mesh mesh_for(const RunConfig& config, const SwitchedProblem& problem) {
  return Mesh::uniform(problem.boundary().t0, problem.boundary().tf, config.mesh_intervals,
                       config.scheme);
}

void write_run_outputs(const fs::path& dir, const RunConfig& config, const PipelineResult& run) {
  fs::create_directories(dir);
  std::ostringstream summary;
  write_summary(summary, config.problem, run);
  write_file(dir / "summary.txt", summary.str());
  if (config.emit_csv) {
    std::ostringstream traj, modes;
    write_trajectory_csv(traj, run.trajectory);
    write_modes_csv(modes, run.modes);
    write_file(dir / "trajectory.csv", traj.str());
    write_file(dir / "modes.csv", modes.str());
  }
  if (config.emit_svg) {
    const Trajectory& tr = run.trajectory;
    std::vector<Series> states;
    for (Eigen::Index i = 0; i < tr.states.cols(); ++i) {
      Series s{"x" + std::to_string(i + 1), tr.times, {}};
      for (int k = 0; k < tr.num_nodes(); ++k) s.y.push_back(tr.states(k, i));
      states.push_back(std::move(s));
    }
    write_file(dir / "states.svg", line_chart_svg("States, beta = " + format_number(run.beta),
                                                  "t", "state", states));

    Series vbar{"vbar", tr.times, {}};
    for (int k = 0; k < tr.num_nodes(); ++k) vbar.y.push_back(tr.mode_signal[k]);
    Series mode{"mode", {}, {}};
    int current = run.modes.initial_mode;
    mode.x.push_back(run.modes.t0);
    mode.y.push_back(current);
    for (double t : run.modes.switch_times) {
      mode.x.push_back(t);
      mode.y.push_back(current);
      current = 1 - current;
      mode.x.push_back(t);
      mode.y.push_back(current);
    }
    mode.x.push_back(run.modes.tf);
    mode.y.push_back(current);
    write_file(dir / "mode_signal.svg",
               line_chart_svg("Mode signal, beta = " + format_number(run.beta), "t", "mode",
                              {vbar, mode}));
  }
}

std::string beta_dir_name(double beta) { return "beta_" + format_number(beta); }

// A feasible point near the default initializer, kept away from the lower
// state bound so square-root dynamics stay differentiable.
Vector random_feasible_point(const Transcription& tr, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const NlpProblem nlp = tr.to_nlp();
  Vector z = default_initializer(tr.problem(), tr.mesh());
  const DecisionLayout& layout = tr.layout();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double lo = nlp.lower[i];
    double hi = nlp.upper[i];
    if (lo == hi) continue;
    z[i] += 0.4 * unit(rng);
    if (std::isfinite(lo) && i < layout.num_nodes() * layout.state_dim()) lo += 0.1;
    z[i] = std::clamp(z[i], lo, hi);
  }
  for (int k = 0; k < layout.num_nodes(); ++k) {
    z[layout.mode(k)] = 0.5 * (1.0 + unit(rng));
  }
  return z;
}

AuditResult gradient_audit(const Transcription& tr, const RunConfig& config) {
  std::mt19937 rng(config.solver.seed);
  NlpProblem nlp = tr.to_nlp();
  if (config.corrupt_gradient) {
    auto exact = nlp.gradient;
    nlp.gradient = [exact](const Vector& z) {
      Vector g = exact(z);
      g[g.size() / 2] += 1e-2 * std::max(1.0, std::abs(g[g.size() / 2]));
      return g;
    };
  }
  double worst = 0.0;
  for (int p = 0; p < kAuditPoints; ++p) {
    const Vector z = random_feasible_point(tr, rng);
    const Vector g = objective_gradient(nlp, z);
    const Vector fd = finite_difference_gradient(nlp, z);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(g[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
    }
  }
  return {"objective gradient vs finite differences", worst < kDerivativeTolerance,
          "max rel err " + format_number(worst)};
}

AuditResult jacobian_audit(const Transcription& tr, const RunConfig& config) {
  std::mt19937 rng(config.solver.seed + 1);
  const NlpProblem nlp = tr.to_nlp();
  double worst = 0.0;
  for (int p = 0; p < kAuditPoints; ++p) {
    const Vector z = random_feasible_point(tr, rng);
    const Matrix jac = Matrix(constraint_jacobian(nlp, z));
    const Matrix fd = finite_difference_jacobian(nlp, z);
    const Matrix scale = fd.cwiseAbs().cwiseMax(1.0);
    worst = std::max(worst, ((jac - fd).cwiseAbs().cwiseQuotient(scale)).maxCoeff());
  }
  return {"defect Jacobian vs finite differences", worst < kDerivativeTolerance,
          "max rel err " + format_number(worst)};
}

// The Hamiltonian is quadratic in the mode signal with leading coefficient
// -4*beta, so its second difference is -8*beta for any step.
AuditResult curvature_audit(const EmbeddedProblem& problem, const RunConfig& config) {
  std::mt19937 rng(config.solver.seed + 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const SwitchedProblem& base = problem.base();
  const int n = base.state_dim();
  const int m = base.control_dim();
  const double expected = -8.0 * problem.beta();
  constexpr double step = 0.1;
  double worst = 0.0;
  for (int p = 0; p < 50; ++p) {
    const double t = base.boundary().t0 +
                     0.5 * (1.0 + unit(rng)) * (base.boundary().tf - base.boundary().t0);
    Vector x = base.boundary().x0 + Vector::NullaryExpr(n, [&] { return unit(rng); });
    x = x.cwiseMax(0.1);
    const Vector lambda = Vector::NullaryExpr(n, [&] { return 3.0 * unit(rng); });
    Vector u0 = base.control_set().midpoint();
    Vector u1 = base.control_set().midpoint();
    for (int j = 0; j < m; ++j) {
      const double half = 0.5 * (base.control_set().upper[j] - base.control_set().lower[j]);
      u0[j] += half * unit(rng);
      u1[j] += half * unit(rng);
    }
    const double v = 0.5 + 0.35 * unit(rng);
    const double second =
        (hamiltonian(problem, t, x, lambda, u0, u1, v + step) -
         2.0 * hamiltonian(problem, t, x, lambda, u0, u1, v) +
         hamiltonian(problem, t, x, lambda, u0, u1, v - step)) /
        (step * step);
    const double err = expected == 0.0 ? std::abs(second)
                                       : std::abs(second - expected) / std::abs(expected);
    worst = std::max(worst, err);
  }
  const bool flat = expected == 0.0;
  return {"Hamiltonian curvature in the mode signal", worst < kCurvatureTolerance,
          (flat ? "flat (beta = 0), max |d2H| " : "expected " + format_number(expected) +
                                                      ", max rel err ") +
              format_number(worst)};
}

AuditResult order_audit(const SwitchedProblem& problem) {
  ModeSequence seq;
  seq.initial_mode = 1;
  seq.t0 = problem.boundary().t0;
  seq.tf = problem.boundary().tf;
  sim::ControlSignal control;
  if (problem.control_dim() > 0) {
    const Vector mid = problem.control_set().midpoint();
    control = [mid](double) { return mid; };
  }
  const double horizon = seq.tf - seq.t0;
  const int coarse = std::max(1, static_cast<int>(std::ceil(20.0 / horizon)));
  auto final_state = [&](int spu) {
    const sim::RolloutResult r = sim::rollout_switched(problem, seq, control, spu);
    Vector out(r.final_state.size() + 1);
    out << r.final_state, r.running_cost;
    return out;
  };
  const Vector reference = final_state(4 * coarse);
  const double e1 = (final_state(coarse) - reference).lpNorm<Eigen::Infinity>();
  const double e2 = (final_state(2 * coarse) - reference).lpNorm<Eigen::Infinity>();
  if (e1 <= 1e-12 * std::max(1.0, reference.lpNorm<Eigen::Infinity>())) {
    return {"RK4 convergence order", true, "exact at the coarsest step"};
  }
  const double factor = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
  return {"RK4 convergence order", factor >= kOrderFactor,
          "error ratio on halving " + format_number(factor)};
}

double beta_for_solve(const RunConfig& config, const SwitchedProblem& problem) {
  return config.betas.empty() ? problem.nominal_beta() : config.betas.front();
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  SwitchedProblem problem = problems::make("two-tank");
  try {
    validate(config);
    if (config.betas.size() > 1) throw ConfigError("solve takes a single beta; use sweep");
    problem = problems::make(config.problem, config.parameters);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const double beta = beta_for_solve(config, problem);
  PipelineResult run;
  try {
    run = run_pipeline(problem, beta, mesh_for(config, problem), config.solver, config.analysis);
  } catch (const std::exception& e) {
    err << "solve failed: " << e.what() << '\n';
    return kExitSolve;
  }
  try {
    write_run_outputs(config.output_dir, config, run);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
  write_summary(out, config.problem, run);
  return run.solve.status == SolveStatus::kFailed ? kExitSolve : kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  SwitchedProblem problem = problems::make("two-tank");
  try {
    validate(config);
    if (config.betas.empty()) throw ConfigError("sweep needs a non-empty beta list");
    problem = problems::make(config.problem, config.parameters);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::vector<PipelineResult> runs;
  const std::vector<SweepRecord> records =
      beta_sweep(problem, config.betas, mesh_for(config, problem), config.solver,
                 config.analysis, config.parallel_sweep, &runs);

  const fs::path dir(config.output_dir);
  try {
    fs::create_directories(dir);
    std::ostringstream csv;
    write_sweep_csv(csv, records);
    if (config.emit_csv) write_file(dir / "sweep.csv", csv.str());
    if (config.emit_svg) {
      Series objective{"NLP objective", {}, {}};
      Series rollout{"switched rollout", {}, {}};
      for (const SweepRecord& r : records) {
        objective.x.push_back(r.beta);
        objective.y.push_back(r.objective);
        rollout.x.push_back(r.beta);
        rollout.y.push_back(r.rollout_cost_switched);
      }
      write_file(dir / "objective_vs_beta.svg",
                 line_chart_svg("Optimal cost vs beta", "beta", "cost", {objective, rollout}));
    }
    for (const PipelineResult& run : runs) {
      if (!run.trajectory.times.empty()) {
        write_run_outputs(runs.size() == 1 ? dir : dir / beta_dir_name(run.beta), config, run);
      }
    }
    out << csv.str();
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
  for (const SweepRecord& r : records) {
    if (r.solve_status == SolveStatus::kFailed) {
      err << "beta " << format_number(r.beta) << ": solve failed\n";
    }
  }
  const bool any_failed = std::any_of(records.begin(), records.end(), [](const SweepRecord& r) {
    return r.solve_status == SolveStatus::kFailed;
  });
  return any_failed ? kExitSolve : kExitOk;
}

std::vector<AuditResult> run_audits(const RunConfig& config) {
  const SwitchedProblem problem = problems::make(config.problem, config.parameters);
  const EmbeddedProblem embedded = embed(problem, beta_for_solve(config, problem));
  const Transcription tr(embedded, mesh_for(config, problem));
  return {gradient_audit(tr, config), jacobian_audit(tr, config),
          curvature_audit(embedded, config), order_audit(problem)};
}

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<AuditResult> results;
  try {
    validate(config);
    if (config.betas.size() > 1) throw ConfigError("check takes a single beta");
    results = run_audits(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "audit error: " << e.what() << '\n';
    return kExitAudit;
  }
  bool all = true;
  for (const AuditResult& r : results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all ? kExitOk : kExitAudit;
}

}  // namespace swocp::cli
