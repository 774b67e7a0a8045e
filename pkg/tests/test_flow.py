import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bo_measures.energies import standard_energy
from bo_measures.flow import (
    FlowError,
    FlowSpec,
    convergence_probe,
    evolve,
    l2_drift,
    linear_symbol,
    trajectory,
    vector_field,
    write_trajectory_csv,
)
from bo_measures.fourier import FourierField, project_low, random_field
from bo_measures.measures import MeasureSpec, sample

from conftest import seeds


@pytest.mark.parametrize("equation", ["BO", "KdV"])
@given(seed=seeds, t=st.floats(-3, 3))
def test_linear_flow_is_an_exact_phase(equation, seed, t):
    u = random_field(10, np.random.default_rng(seed))
    out = evolve(FlowSpec(equation, 10), u, t, nonlinear=False)
    expected = np.exp(linear_symbol(equation, 10) * t) * u.coeffs
    assert np.allclose(out.coeffs, expected, atol=1e-13)


def test_bo_linear_symbol():
    # u_t = -H u_xx: e^{ijx} -> -(-i sign j)(-j^2) ... = -i j^2 for j > 0
    assert np.allclose(linear_symbol("BO", 3), -1j * np.array([1, 4, 9]))


def test_time_zero_and_zero_field(rng):
    u = random_field(12, rng)
    spec = FlowSpec("BO", 8)
    assert np.array_equal(evolve(spec, u, 0.0).coeffs, u.coeffs)
    z = evolve(spec, FourierField.zeros(8), 1.0)
    assert not np.any(z.coeffs)


def test_modes_above_N_follow_the_linear_flow(rng):
    u = random_field(12, rng)
    spec = FlowSpec("BO", 6)
    full = evolve(spec, u, 0.3)
    lin = evolve(spec, u, 0.3, nonlinear=False)
    assert np.allclose(full.coeffs[6:], lin.coeffs[6:], atol=1e-14)


def test_n_equals_one_has_no_nonlinearity():
    u = FourierField.from_modes({1: 0.7 + 0.2j})
    spec = FlowSpec("BO", 1)
    assert np.allclose(vector_field(spec, u).coeffs, -1j * u.coeffs)
    assert np.allclose(evolve(spec, u, 2.0).coeffs, np.exp(-2j) * u.coeffs, atol=1e-14)


def test_l2_norm_is_conserved():
    u = sample(MeasureSpec(2, 32, seed=3)).field
    assert l2_drift(FlowSpec("BO", 32, tol=1e-8), u, 1.0) <= 1e-8


def test_reversibility(rng):
    u = project_low(random_field(16, rng), 16) * 0.3
    spec = FlowSpec("BO", 16)
    back = evolve(spec, evolve(spec, u, 0.5), -0.5)
    assert np.max(np.abs(back.coeffs - u.coeffs)) <= 1e-9


def test_half_energy_is_conserved_by_the_truncation():
    u = sample(MeasureSpec(2, 24, seed=5)).field
    spec = FlowSpec("BO", 24)
    E = standard_energy(1)
    e0 = E(u)
    values = [E(project_low(v, 24)) for _, v in trajectory(spec, u, 0.5, stride=50)]
    assert len(values) > 10
    assert max(abs(v - e0) for v in values) <= 1e-9 * abs(e0)


def test_drift_failure_raises(rng):
    u = random_field(16, rng) * 50
    spec = FlowSpec("BO", 16, dt=0.5, tol=1e-14, max_halvings=1)
    with pytest.raises(FlowError):
        evolve(spec, u, 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        FlowSpec("NLS")
    with pytest.raises(ValueError):
        FlowSpec(dt=0)


def test_convergence_probe_grid_checks(rng):
    u = random_field(8, rng)
    with pytest.raises(ValueError):
        convergence_probe(u, [32], 0.1, 1.0)
    with pytest.raises(ValueError):
        convergence_probe(u, [16, 32], 0.1, 1.0)


def test_convergence_probe_rows():
    u = sample(MeasureSpec(4, 128, seed=0)).field
    rows = convergence_probe(u, [8, 16, 128], 0.1, 1.2)
    assert [n for n, _ in rows] == [8, 16]
    assert rows[1][1] < rows[0][1]


def test_trajectory_csv(tmp_path, rng):
    u = random_field(4, rng) * 0.1
    points = list(trajectory(FlowSpec("BO", 4, dt=1e-2), u, 0.1, stride=5))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, points)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "n", "re", "im"]
    assert len(rows) == 1 + 3 * 4
    assert complex(float(rows[1][2]), float(rows[1][3])) == u.coeffs[0]
