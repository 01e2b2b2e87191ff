import math

import numpy as np
import pytest

import swocp


def test_problem_registry():
    assert set(swocp.problem_names()) >= {"two-tank", "double-integrator"}
    tank = swocp.make_problem("two-tank")
    assert tank.state_dim == 2
    assert tank.control_dim == 0
    assert tank.tf == 20.0
    with pytest.raises(ValueError):
        swocp.make_problem("no-such-problem")


def test_aux_cost_shape():
    assert swocp.aux_cost(0.5, 0.2) == pytest.approx(0.2, abs=1e-15)
    assert swocp.aux_cost(0.0, 0.2) == 0.0
    assert swocp.aux_cost(1.0, 0.2) == 0.0
    assert swocp.aux_cost(0.3, 0.2) == pytest.approx(swocp.aux_cost(0.7, 0.2), abs=1e-15)


def test_overrides_reach_the_problem():
    tank = swocp.make_problem("two-tank", {"x0": [3.0, 1.0]})
    np.testing.assert_allclose(tank.x0, [3.0, 1.0])


def test_hamiltonian_curvature():
    e = swocp.embed(swocp.make_problem("two-tank"), 0.2)
    x = np.array([2.0, 2.5])
    lam = np.array([0.4, -1.1])
    empty = np.zeros(0)
    h = [swocp.hamiltonian(e, 0.0, x, lam, empty, empty, v) for v in (0.3, 0.4, 0.5)]
    assert (h[0] - 2 * h[1] + h[2]) / 0.01 == pytest.approx(-1.6, rel=1e-6)


def test_double_integrator_pipeline():
    problem = swocp.make_problem("double-integrator")
    result = swocp.run_pipeline(problem, 0.0, swocp.Mesh.uniform(0.0, 2.0, 100))
    assert result.solve.status != swocp.SolveStatus.FAILED
    assert result.solve.objective_value == pytest.approx(23.0 / 30.0, rel=0.01)
    assert result.modes.num_switches == 1
    assert result.modes.switch_times[0] == pytest.approx(1.0, abs=0.05)
    assert not result.solution_class.singular
    assert np.abs(result.rollout.final_state).max() < 1e-3
    times = np.asarray(result.trajectory.times)
    assert times[0] == 0.0 and times[-1] == 2.0
    assert np.asarray(result.trajectory.states).shape == (101, 2)


def test_extract_and_classify_on_solution():
    problem = swocp.make_problem("double-integrator")
    result = swocp.run_pipeline(problem, 0.1, swocp.Mesh.uniform(0.0, 2.0, 60))
    seq = swocp.extract_modes(result.trajectory)
    assert seq.initial_mode == 0
    assert seq.mode_at(1.9) == 1
    assert not swocp.classify(result.trajectory).singular
    report = swocp.project_and_rollout(problem, seq)
    assert report.switched_cost == pytest.approx(23.0 / 30.0, rel=0.02)


def test_mode_sequence_validation():
    seq = swocp.ModeSequence(1, [0.5, 1.25], 0.0, 2.0)
    assert seq.num_switches == 2
    assert seq.min_dwell == pytest.approx(0.75)
    with pytest.raises(ValueError):
        swocp.ModeSequence(0, [1.5, 0.5], 0.0, 2.0)


def test_beta_sweep_keeps_input_order():
    problem = swocp.make_problem("double-integrator")
    betas = [0.3, 0.0, 0.1]
    records = swocp.beta_sweep(problem, betas, swocp.Mesh.uniform(0.0, 2.0, 60))
    assert [r.beta for r in records] == betas
    by_beta = sorted(records, key=lambda r: r.beta)
    objectives = [r.objective for r in by_beta]
    assert objectives == sorted(objectives)
    assert all(math.isfinite(r.rollout_cost_switched) for r in records)
    with pytest.raises(ValueError):
        swocp.beta_sweep(problem, [-0.1], swocp.Mesh.uniform(0.0, 2.0, 20))
