#include "swocp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace swocp {
namespace {

constexpr int kHamiltonianGrid = 1001;
constexpr double kMatchTolerance = 0.05;
constexpr double kFlatTolerance = 1e-9;

// Length of [a, b] on which the linear signal from va to vb lies strictly
// inside (lo, hi).
double time_inside(double a, double b, double va, double vb, double lo, double hi) {
  const double h = b - a;
  if (va == vb) return (va > lo && va < hi) ? h : 0.0;
  // Parametrize s in [0,1]; v(s) = va + s (vb - va).
  double s_lo = (lo - va) / (vb - va);
  double s_hi = (hi - va) / (vb - va);
  if (s_lo > s_hi) std::swap(s_lo, s_hi);
  const double s0 = std::max(0.0, s_lo);
  const double s1 = std::min(1.0, s_hi);
  return s1 > s0 ? (s1 - s0) * h : 0.0;
}

}  // namespace

SolutionClass classify(const Trajectory& trajectory, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("classify: delta in (0, 0.5)");
  const int nodes = trajectory.num_nodes();
  const int intervals = nodes - 1;
  SolutionClass out;
  out.delta = delta;
  if (intervals < 1) return out;
  const double lo = delta;
  const double hi = 1.0 - delta;
  const Vector& v = trajectory.mode_signal;
  auto inside = [&](int k) { return v[k] > lo && v[k] < hi; };
  auto low = [&](int k) { return v[k] <= lo; };
  auto high = [&](int k) { return v[k] >= hi; };

  // Walk maximal runs of in-band nodes. Each run is measured on the
  // intervals that touch it. A single in-band node between a low and a high
  // neighbour is the linear ramp of one switch and counts as zero, as does
  // an interval that jumps straight across the band.
  int k = 0;
  while (k < nodes) {
    if (!inside(k)) {
      ++k;
      continue;
    }
    int end = k;
    while (end + 1 < nodes && inside(end + 1)) ++end;
    const bool ramp = end == k && k > 0 && k + 1 < nodes &&
                      ((low(k - 1) && high(k + 1)) || (high(k - 1) && low(k + 1)));
    if (!ramp) {
      for (int i = std::max(0, k - 1); i <= std::min(end, intervals - 1); ++i) {
        out.singular_measure += time_inside(trajectory.times[i], trajectory.times[i + 1], v[i],
                                            v[i + 1], lo, hi);
      }
    }
    k = end + 1;
  }
  out.measure_threshold = 2.0 * (trajectory.tf() - trajectory.t0()) / intervals;
  out.singular = out.singular_measure > out.measure_threshold;
  return out;
}

ModeSequence extract_modes(const Trajectory& trajectory, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("extract_modes: threshold in (0, 1)");
  }
  ModeSequence seq;
  seq.t0 = trajectory.t0();
  seq.tf = trajectory.tf();
  auto mode_of = [threshold](double v) { return v > threshold ? 1 : 0; };
  const Vector& v = trajectory.mode_signal;
  seq.initial_mode = mode_of(v[0]);
  int current = seq.initial_mode;
  for (int k = 0; k + 1 < trajectory.num_nodes(); ++k) {
    const int next = mode_of(v[k + 1]);
    if (next == current) continue;
    const double a = trajectory.times[k];
    const double b = trajectory.times[k + 1];
    const double s = (threshold - v[k]) / (v[k + 1] - v[k]);
    double t = a + std::clamp(s, 0.0, 1.0) * (b - a);
    if (!seq.switch_times.empty() && t <= seq.switch_times.back()) {
      t = std::nextafter(seq.switch_times.back(), b);
    }
    seq.switch_times.push_back(t);
    current = next;
  }
  return seq;
}

RolloutReport project_and_rollout(const SwitchedProblem& problem, const ModeSequence& seq,
                                  const sim::ControlSignal& control, int steps_per_unit_time) {
  RolloutReport report;
  report.rollout = sim::rollout_switched(problem, seq, control, steps_per_unit_time);
  report.final_state = report.rollout.final_state;
  report.diverged = report.rollout.diverged;
  report.switched_cost = report.rollout.total_cost();
  report.boundary_violation = report.diverged ? std::numeric_limits<double>::infinity()
                                              : problem.final_box_violation(report.final_state);
  return report;
}

CostateTrajectory estimate_costates(const SolveResult& result, const Mesh& mesh,
                                    const EmbeddedProblem& problem) {
  const int n = problem.state_dim();
  const int intervals = mesh.num_intervals();
  if (result.multipliers.size() != static_cast<Eigen::Index>(intervals) * n) {
    throw std::invalid_argument("estimate_costates: multipliers do not match the mesh");
  }
  Matrix interval_costate(intervals, n);
  for (int k = 0; k < intervals; ++k) {
    interval_costate.row(k) = -result.multipliers.segment(k * n, n).transpose() / mesh.step(k);
  }
  CostateTrajectory out;
  out.times = mesh.grid;
  out.costates.resize(intervals + 1, n);
  if (intervals == 1) {
    out.costates.row(0) = interval_costate.row(0);
    out.costates.row(1) = interval_costate.row(0);
    return out;
  }
  for (int k = 1; k < intervals; ++k) {
    out.costates.row(k) = 0.5 * (interval_costate.row(k - 1) + interval_costate.row(k));
  }
  out.costates.row(0) = 1.5 * interval_costate.row(0) - 0.5 * interval_costate.row(1);
  out.costates.row(intervals) =
      1.5 * interval_costate.row(intervals - 1) - 0.5 * interval_costate.row(intervals - 2);
  return out;
}

double HamiltonianProfile::fraction_at_boundary() const {
  if (nodes.empty()) return 0.0;
  const auto hits = std::count_if(nodes.begin(), nodes.end(),
                                  [](const HamiltonianNode& n) { return n.at_boundary; });
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

double HamiltonianProfile::fraction_matching_solution() const {
  if (nodes.empty()) return 0.0;
  const auto hits = std::count_if(nodes.begin(), nodes.end(),
                                  [](const HamiltonianNode& n) { return n.matches_solution; });
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

double HamiltonianProfile::fraction_matching_modes(const ModeSequence& seq) const {
  if (nodes.empty()) return 0.0;
  const auto hits = std::count_if(nodes.begin(), nodes.end(), [&](const HamiltonianNode& n) {
    return n.at_boundary && static_cast<int>(n.minimizer) == seq.mode_at(n.time);
  });
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

HamiltonianProfile hamiltonian_profile(const EmbeddedProblem& problem,
                                       const Trajectory& trajectory,
                                       const CostateTrajectory& costates) {
  if (costates.times.size() != trajectory.times.size()) {
    throw std::invalid_argument("hamiltonian_profile: grids differ");
  }
  HamiltonianProfile profile;
  profile.nodes.reserve(trajectory.times.size());
  for (int k = 0; k < trajectory.num_nodes(); ++k) {
    const double t = trajectory.times[k];
    const Vector x = trajectory.states.row(k).transpose();
    const Vector lambda = costates.costates.row(k).transpose();
    const Vector u0 = trajectory.controls_u0.row(k).transpose();
    const Vector u1 = trajectory.controls_u1.row(k).transpose();
    double best = std::numeric_limits<double>::infinity();
    double worst = -best;
    double argmin = 0.0;
    for (int i = 0; i < kHamiltonianGrid; ++i) {
      const double v = static_cast<double>(i) / (kHamiltonianGrid - 1);
      const double value = hamiltonian(problem, t, x, lambda, u0, u1, v);
      if (value < best) {
        best = value;
        argmin = v;
      }
      worst = std::max(worst, value);
    }
    HamiltonianNode node;
    node.time = t;
    node.minimizer = argmin;
    node.at_boundary = argmin == 0.0 || argmin == 1.0;
    node.matches_solution = std::abs(argmin - trajectory.mode_signal[k]) <= kMatchTolerance;
    node.flat = worst - best <= kFlatTolerance;
    profile.nodes.push_back(node);
  }
  return profile;
}

PipelineResult run_pipeline(const SwitchedProblem& problem, double beta, const Mesh& mesh,
                            const SolveOptions& options, const AnalysisOptions& analysis) {
  PipelineResult run;
  run.beta = beta;
  run.mesh = mesh;
  const EmbeddedProblem embedded = embed(problem, beta);
  const Transcription transcription(embedded, mesh);
  run.solve = solve(transcription.to_nlp(), default_initializer(embedded, mesh), options);
  run.trajectory = transcription.to_trajectory(run.solve.z_opt);
  run.solution_class = classify(run.trajectory, analysis.delta);
  run.modes = extract_modes(run.trajectory, analysis.threshold);

  sim::ControlSignal control;
  if (problem.control_dim() > 0) {
    control = [traj = run.trajectory, seq = run.modes](double t) {
      const Trajectory::Sample s = traj.interpolate(t);
      return seq.mode_at(t) == 0 ? s.u0 : s.u1;
    };
  }
  run.rollout =
      project_and_rollout(problem, run.modes, control, analysis.rollout_steps_per_unit_time);
  return run;
}

SweepRecord make_record(const PipelineResult& run) {
  SweepRecord record;
  record.beta = run.beta;
  record.objective = run.solve.objective_value;
  record.rollout_cost_switched = run.rollout.switched_cost;
  record.num_switches = run.modes.num_switches();
  record.min_dwell = run.modes.min_dwell();
  record.max_boundary_violation = run.rollout.boundary_violation;
  record.solve_status = run.solve.status;
  return record;
}

std::vector<SweepRecord> beta_sweep(const SwitchedProblem& problem,
                                    const std::vector<double>& betas, const Mesh& mesh,
                                    const SolveOptions& options, const AnalysisOptions& analysis,
                                    bool parallel, std::vector<PipelineResult>* runs) {
  for (double beta : betas) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta_sweep: betas must be non-negative");
  }
  auto one = [&](double beta) {
    try {
      return run_pipeline(problem, beta, mesh, options, analysis);
    } catch (const std::exception& e) {
      PipelineResult failed;
      failed.beta = beta;
      failed.mesh = mesh;
      failed.solve.status = SolveStatus::kFailed;
      failed.solve.message = e.what();
      failed.solve.objective_value = std::numeric_limits<double>::quiet_NaN();
      failed.rollout.switched_cost = std::numeric_limits<double>::quiet_NaN();
      failed.rollout.boundary_violation = std::numeric_limits<double>::quiet_NaN();
      return failed;
    }
  };

  std::vector<PipelineResult> results;
  results.reserve(betas.size());
  if (parallel && betas.size() > 1) {
    std::vector<std::future<PipelineResult>> futures;
    futures.reserve(betas.size());
    for (double beta : betas) futures.push_back(std::async(std::launch::async, one, beta));
    for (auto& f : futures) results.push_back(f.get());
  } else {
    for (double beta : betas) results.push_back(one(beta));
  }

  std::vector<SweepRecord> records;
  records.reserve(results.size());
  for (const PipelineResult& r : results) records.push_back(make_record(r));
  if (runs) *runs = std::move(results);
  return records;
}

}  // namespace swocp
