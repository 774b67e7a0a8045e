import csv
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bo_measures.series import (
    MAX_N_DOUBLE,
    MAX_N_MULTI,
    CostGuardError,
    LatticeSumSpec,
    brute_force,
    evaluate,
    fit_rate,
    geometric_grid,
    integral_bound_holds,
    positive_orbit_sum,
    scaled_value,
    write_rates_csv,
)


def test_n_equals_one_examples():
    assert evaluate(LatticeSumSpec("algebrTV", 1)) == 2.0
    assert evaluate(LatticeSumSpec("serienew", 1)) == 2.0


@pytest.mark.parametrize("spec", [
    LatticeSumSpec("algebrTV", 7),
    LatticeSumSpec("serienew", 9),
    LatticeSumSpec("sersaut", 6),
    LatticeSumSpec("algebrTV2", 5, m=3),
    LatticeSumSpec("algebrTV2", 4, m=4),
    LatticeSumSpec("generic", 5, exponents=(1, 0.5, 2)),
    LatticeSumSpec("generic", 6, exponents=(2, 3), constraint="le"),
])
def test_matches_brute_force(spec):
    assert evaluate(spec) == pytest.approx(brute_force(spec), rel=1e-13)


@given(N=st.integers(1, 12), a=st.integers(-1, 3), b=st.integers(-1, 3),
       constraint=st.sampled_from(["gt", "le"]))
def test_generic_double_sums(N, a, b, constraint):
    spec = LatticeSumSpec("generic", N, exponents=(a, b), constraint=constraint)
    assert evaluate(spec) == pytest.approx(brute_force(spec), rel=1e-12, abs=1e-12)


@given(N=st.integers(1, 10))
def test_gt_and_le_split_the_full_sum(N):
    gt = evaluate(LatticeSumSpec("generic", N, exponents=(1, 2)))
    le = evaluate(LatticeSumSpec("generic", N, exponents=(1, 2), constraint="le"))
    h1 = sum(1 / j for j in range(1, N + 1))
    h2 = sum(1 / j ** 2 for j in range(1, N + 1))
    assert gt + le == pytest.approx(4 * h1 * h2, rel=1e-13)


@pytest.mark.parametrize("N", [1, 2, 5, 13, 40])
def test_positive_orbit_reduction_is_exact(N):
    pairs = [(j, l) for j, l in itertools.product(range(-N, N + 1), repeat=2)
             if j and l and abs(j + l) > N]
    full = sum(Fraction(1, abs(j) * l * l) for j, l in pairs)
    positive = sum(Fraction(1, j * l * l) for j, l in pairs if j > 0)
    assert full == 2 * positive
    assert positive_orbit_sum(N) == pytest.approx(float(full), rel=1e-14)
    assert evaluate(LatticeSumSpec("algebrTV", N)) == pytest.approx(float(full), rel=1e-14)


def test_cost_guards():
    with pytest.raises(CostGuardError):
        evaluate(LatticeSumSpec("algebrTV", MAX_N_DOUBLE + 1))
    with pytest.raises(CostGuardError):
        evaluate(LatticeSumSpec("algebrTV2", MAX_N_MULTI + 1, m=3))
    evaluate(LatticeSumSpec("algebrTV", MAX_N_DOUBLE))


@pytest.mark.parametrize("kwargs", [
    dict(lemma="nope", N=4),
    dict(lemma="algebrTV", N=0),
    dict(lemma="algebrTV", N=4, constraint="lt"),
    dict(lemma="algebrTV2", N=4, m=1),
    dict(lemma="generic", N=4, exponents=(1,)),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        LatticeSumSpec(**kwargs)


def test_geometric_grid():
    grid = geometric_grid(16, 2 ** 14, 11)
    assert grid[0] == 16 and grid[-1] == 2 ** 14 and len(grid) == 11
    assert all(b > a for a, b in zip(grid, grid[1:]))


@pytest.mark.parametrize("lemma, m, grid", [
    ("algebrTV", 2, geometric_grid(16, 2 ** 14, 11)),
    ("algebrTV2", 2, geometric_grid(16, 2 ** 14, 11)),
    ("algebrTV2", 3, geometric_grid(16, 256, 9)),
    ("serienew", 2, geometric_grid(16, 2 ** 14, 11)),
    ("sersaut", 2, geometric_grid(16, 2 ** 12, 9)),
])
def test_rates_are_bounded(lemma, m, grid):
    fit = fit_rate(lemma, grid, m=m)
    assert fit.bounded
    assert fit.sup_scaled == max(fit.scaled)
    assert np.isfinite(fit.exponent) and np.isfinite(fit.log_exponent)


def test_fit_rate_needs_a_real_grid():
    with pytest.raises(ValueError):
        fit_rate("algebrTV", (16, 32, 64))
    with pytest.raises(ValueError):
        fit_rate("algebrTV", (2, 4, 8, 16, 32, 64))


def test_algebrTV_decreases_on_the_grid():
    values = [evaluate(LatticeSumSpec("algebrTV", n)) for n in geometric_grid(16, 2 ** 14, 11)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_scaled_value():
    assert scaled_value("serienew", 16, 2.0) == pytest.approx(8.0)


def test_integral_bound():
    holds, worst = integral_bound_holds(2 ** 10, C=2.0)
    assert holds and worst <= 1.0
    # C = 1 is too small: a = 1, N = 2 gives 1 + 1/4 > 1
    assert not integral_bound_holds(16, C=1.0)[0]


def test_rates_csv(tmp_path):
    fit = fit_rate("algebrTV", geometric_grid(16, 1024, 7))
    path = tmp_path / "rates.csv"
    write_rates_csv(path, [fit])
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lemma", "N", "value", "scaled_value"]
    assert len(rows) == 1 + len(fit.grid)
    assert float(rows[1][2]) == fit.values[0]
