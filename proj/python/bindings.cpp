#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swocp/analysis.hpp"
#include "swocp/problems.hpp"
#include "swocp/sim.hpp"

namespace py = pybind11;
using namespace swocp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Embedded switched optimal control: transcription, solver and analysis.";

  py::enum_<Scheme>(m, "Scheme")
      .value("TRAPEZOIDAL", Scheme::kTrapezoidal)
      .value("HERMITE_SIMPSON", Scheme::kHermiteSimpson);
  m.def("parse_scheme", &parse_scheme);

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("CONVERGED", SolveStatus::kConverged)
      .value("MAX_ITERS", SolveStatus::kMaxIters)
      .value("FAILED", SolveStatus::kFailed);

  py::class_<SwitchedProblem>(m, "SwitchedProblem")
      .def_property_readonly("name", &SwitchedProblem::name)
      .def_property_readonly("state_dim", &SwitchedProblem::state_dim)
      .def_property_readonly("control_dim", &SwitchedProblem::control_dim)
      .def_property_readonly("t0", [](const SwitchedProblem& p) { return p.boundary().t0; })
      .def_property_readonly("tf", [](const SwitchedProblem& p) { return p.boundary().tf; })
      .def_property_readonly("x0", [](const SwitchedProblem& p) { return p.boundary().x0; })
      .def_property_readonly("nominal_beta", &SwitchedProblem::nominal_beta)
      .def("dynamics", &SwitchedProblem::dynamics, py::arg("mode"), py::arg("t"), py::arg("x"),
           py::arg("u"))
      .def("final_box_violation", &SwitchedProblem::final_box_violation);

  m.def("problem_names", &problems::names);
  m.def("make_problem", &problems::make, py::arg("name"),
        py::arg("overrides") = problems::Parameters{});

  py::class_<EmbeddedProblem>(m, "EmbeddedProblem")
      .def_property_readonly("beta", &EmbeddedProblem::beta)
      .def("dynamics", &EmbeddedProblem::dynamics)
      .def("running_cost", &EmbeddedProblem::running_cost);
  m.def("embed", &embed, py::arg("problem"), py::arg("beta"));
  m.def("aux_cost", &aux_cost, py::arg("vbar"), py::arg("beta"));
  m.def("hamiltonian", &hamiltonian, py::arg("problem"), py::arg("t"), py::arg("x"),
        py::arg("costate"), py::arg("u0"), py::arg("u1"), py::arg("vbar"));

  py::class_<Mesh>(m, "Mesh")
      .def_static("uniform", &Mesh::uniform, py::arg("t0"), py::arg("tf"),
                  py::arg("num_intervals"), py::arg("scheme") = Scheme::kTrapezoidal)
      .def_readonly("grid", &Mesh::grid)
      .def_readonly("scheme", &Mesh::scheme)
      .def_property_readonly("num_intervals", &Mesh::num_intervals);

  py::class_<SolveOptions>(m, "SolveOptions")
      .def(py::init<>())
      .def_readwrite("max_outer_iters", &SolveOptions::max_outer_iters)
      .def_readwrite("max_inner_iters", &SolveOptions::max_inner_iters)
      .def_readwrite("constraint_tol", &SolveOptions::constraint_tol)
      .def_readwrite("optimality_tol", &SolveOptions::optimality_tol)
      .def_readwrite("initial_penalty", &SolveOptions::initial_penalty)
      .def_readwrite("penalty_growth", &SolveOptions::penalty_growth)
      .def_readwrite("seed", &SolveOptions::seed);

  py::class_<AnalysisOptions>(m, "AnalysisOptions")
      .def(py::init<>())
      .def_readwrite("delta", &AnalysisOptions::delta)
      .def_readwrite("threshold", &AnalysisOptions::threshold)
      .def_readwrite("rollout_steps_per_unit_time", &AnalysisOptions::rollout_steps_per_unit_time);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("controls_u0", &Trajectory::controls_u0)
      .def_readonly("controls_u1", &Trajectory::controls_u1)
      .def_readonly("mode_signal", &Trajectory::mode_signal);

  py::class_<ModeSequence>(m, "ModeSequence")
      .def(py::init([](int initial_mode, std::vector<double> switch_times, double t0, double tf) {
             ModeSequence seq{initial_mode, std::move(switch_times), t0, tf};
             seq.validate();
             return seq;
           }),
           py::arg("initial_mode"), py::arg("switch_times"), py::arg("t0"), py::arg("tf"))
      .def_readonly("initial_mode", &ModeSequence::initial_mode)
      .def_readonly("switch_times", &ModeSequence::switch_times)
      .def_readonly("t0", &ModeSequence::t0)
      .def_readonly("tf", &ModeSequence::tf)
      .def_property_readonly("num_switches", &ModeSequence::num_switches)
      .def_property_readonly("min_dwell", &ModeSequence::min_dwell)
      .def("mode_at", &ModeSequence::mode_at);

  py::class_<SolutionClass>(m, "SolutionClass")
      .def_readonly("singular", &SolutionClass::singular)
      .def_readonly("singular_measure", &SolutionClass::singular_measure)
      .def_readonly("measure_threshold", &SolutionClass::measure_threshold);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("objective_value", &SolveResult::objective_value)
      .def_readonly("constraint_violation", &SolveResult::constraint_violation)
      .def_readonly("status", &SolveResult::status)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("function_evals", &SolveResult::function_evals)
      .def_readonly("multipliers", &SolveResult::multipliers)
      .def_readonly("z_opt", &SolveResult::z_opt);

  py::class_<RolloutReport>(m, "RolloutReport")
      .def_readonly("final_state", &RolloutReport::final_state)
      .def_readonly("switched_cost", &RolloutReport::switched_cost)
      .def_readonly("boundary_violation", &RolloutReport::boundary_violation)
      .def_readonly("diverged", &RolloutReport::diverged);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("beta", &PipelineResult::beta)
      .def_readonly("solve", &PipelineResult::solve)
      .def_readonly("trajectory", &PipelineResult::trajectory)
      .def_readonly("solution_class", &PipelineResult::solution_class)
      .def_readonly("modes", &PipelineResult::modes)
      .def_readonly("rollout", &PipelineResult::rollout);

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("beta", &SweepRecord::beta)
      .def_readonly("objective", &SweepRecord::objective)
      .def_readonly("rollout_cost_switched", &SweepRecord::rollout_cost_switched)
      .def_readonly("num_switches", &SweepRecord::num_switches)
      .def_readonly("min_dwell", &SweepRecord::min_dwell)
      .def_readonly("max_boundary_violation", &SweepRecord::max_boundary_violation)
      .def_readonly("solve_status", &SweepRecord::solve_status);

  m.def("classify", &classify, py::arg("trajectory"), py::arg("delta") = 0.05);
  m.def("extract_modes", &extract_modes, py::arg("trajectory"), py::arg("threshold") = 0.5);
  m.def(
      "project_and_rollout",
      [](const SwitchedProblem& problem, const ModeSequence& seq, int steps_per_unit_time) {
        return project_and_rollout(problem, seq, {}, steps_per_unit_time);
      },
      py::arg("problem"), py::arg("modes"), py::arg("steps_per_unit_time") = 1000);

  m.def("run_pipeline", &run_pipeline, py::arg("problem"), py::arg("beta"), py::arg("mesh"),
        py::arg("options") = SolveOptions{}, py::arg("analysis") = AnalysisOptions{},
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "beta_sweep",
      [](const SwitchedProblem& problem, const std::vector<double>& betas, const Mesh& mesh,
         const SolveOptions& options, const AnalysisOptions& analysis, bool parallel) {
        return beta_sweep(problem, betas, mesh, options, analysis, parallel);
      },
      py::arg("problem"), py::arg("betas"), py::arg("mesh"), py::arg("options") = SolveOptions{},
      py::arg("analysis") = AnalysisOptions{}, py::arg("parallel") = true,
      py::call_guard<py::gil_scoped_release>());
}
