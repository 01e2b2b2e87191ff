"""Switched optimal control through embedding and an auxiliary switching cost."""

from ._core import (
    AnalysisOptions,
    Mesh,
    ModeSequence,
    Scheme,
    SolveOptions,
    SolveStatus,
    aux_cost,
    beta_sweep,
    classify,
    embed,
    extract_modes,
    hamiltonian,
    make_problem,
    parse_scheme,
    problem_names,
    project_and_rollout,
    run_pipeline,
)

__all__ = [
    "AnalysisOptions",
    "Mesh",
    "ModeSequence",
    "Scheme",
    "SolveOptions",
    "SolveStatus",
    "aux_cost",
    "beta_sweep",
    "classify",
    "embed",
    "extract_modes",
    "hamiltonian",
    "make_problem",
    "parse_scheme",
    "problem_names",
    "project_and_rollout",
    "run_pipeline",
]
