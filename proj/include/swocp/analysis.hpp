#pragma once

#include <string>
#include <vector>

#include "swocp/mode_sequence.hpp"
#include "swocp/nlp.hpp"
#include "swocp/ocp.hpp"
#include "swocp/sim.hpp"
#include "swocp/transcription.hpp"

namespace swocp {

struct SolutionClass {
  bool singular = false;
  double singular_measure = 0.0;  // time spent with vbar in (delta, 1 - delta)
  double delta = 0.05;
  double measure_threshold = 0.0;  // two mean mesh intervals
};

/// Singular iff the time spent strictly inside (delta, 1 - delta) exceeds two
/// mean mesh intervals. The signal is taken as linear between nodes. Switch
/// transients are not counted: an interval jumping straight across the band,
/// or a lone in-band node between a low and a high neighbour.
SolutionClass classify(const Trajectory& trajectory, double delta = 0.05);

/// Mode 1 wherever the piecewise-linear signal exceeds `threshold` (ties go
/// to mode 0). Switch instants are the interpolated threshold crossings.
ModeSequence extract_modes(const Trajectory& trajectory, double threshold = 0.5);

struct RolloutReport {
  Vector final_state;
  double switched_cost = 0.0;
  double boundary_violation = 0.0;  // max componentwise final-box violation
  bool diverged = false;
  sim::RolloutResult rollout;
};

/// Applies a binary mode sequence to the switched system over the sequence's
/// horizon and measures cost and final-box violation.
RolloutReport project_and_rollout(const SwitchedProblem& problem, const ModeSequence& seq,
                                  const sim::ControlSignal& control = {},
                                  int steps_per_unit_time = 1000);

/// Costates from the defect multipliers. With Lagrangian f + mu . c and
/// defects in rate form, the interval costate is -mu_k / h_k; node values
/// average the two adjacent intervals and the endpoints are extrapolated
/// linearly.
CostateTrajectory estimate_costates(const SolveResult& result, const Mesh& mesh,
                                    const EmbeddedProblem& problem);

struct HamiltonianNode {
  double time = 0.0;
  double minimizer = 0.0;  // grid minimizer of vbar -> H over [0,1]
  bool at_boundary = false;
  bool matches_solution = false;  // |minimizer - solved vbar| <= 0.05
  bool flat = false;              // H varies by at most 1e-9 over the grid
};

struct HamiltonianProfile {
  std::vector<HamiltonianNode> nodes;

  double fraction_at_boundary() const;
  double fraction_matching_solution() const;
  /// Fraction of nodes whose minimizer equals the mode of `seq` at that node.
  double fraction_matching_modes(const ModeSequence& seq) const;
};

HamiltonianProfile hamiltonian_profile(const EmbeddedProblem& problem,
                                       const Trajectory& trajectory,
                                       const CostateTrajectory& costates);

struct AnalysisOptions {
  double delta = 0.05;
  double threshold = 0.5;
  int rollout_steps_per_unit_time = 1000;
};

/// Embed, transcribe, solve from the default initializer, then classify,
/// extract the mode sequence and roll it out on the switched system.
struct PipelineResult {
  double beta = 0.0;
  Mesh mesh;
  SolveResult solve;
  Trajectory trajectory;
  SolutionClass solution_class;
  ModeSequence modes;
  RolloutReport rollout;
};

PipelineResult run_pipeline(const SwitchedProblem& problem, double beta, const Mesh& mesh,
                            const SolveOptions& options, const AnalysisOptions& analysis = {});

struct SweepRecord {
  double beta = 0.0;
  double objective = 0.0;
  double rollout_cost_switched = 0.0;
  int num_switches = 0;
  double min_dwell = 0.0;
  double max_boundary_violation = 0.0;
  SolveStatus solve_status = SolveStatus::kFailed;
};

SweepRecord make_record(const PipelineResult& run);

/// One pipeline run per beta, possibly concurrent; records follow input
/// order. A failing beta is recorded in its status and does not stop the
/// sweep. When `runs` is non-null it receives the full per-beta results.
std::vector<SweepRecord> beta_sweep(const SwitchedProblem& problem,
                                    const std::vector<double>& betas, const Mesh& mesh,
                                    const SolveOptions& options,
                                    const AnalysisOptions& analysis = {}, bool parallel = true,
                                    std::vector<PipelineResult>* runs = nullptr);

}  // namespace swocp
