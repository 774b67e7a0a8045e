import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bo_measures.measures import sample_g
from bo_measures.moments import (
    MomentQuery,
    TupleSetSpec,
    check_disjoint_union,
    check_partition,
    check_sign_symmetry,
    enumerate_set,
    exact_moment,
    head_set_characterization,
    l2_norm_sq_direct,
    l2_norm_sq_grouped,
    literal_set_difference_counterexample,
    monte_carlo_moment,
    random_queries,
    signature,
    verify_orthogonality,
)

from conftest import seeds

nonzero = st.integers(-5, 5).filter(bool)
index_lists = st.lists(nonzero, max_size=6)


def has_opposite_pair(t):
    return any(t[a] == -t[b] for a in range(len(t)) for b in range(len(t)) if a != b)


@pytest.mark.parametrize("J, I, expected", [
    ((1,), (1,), 1),
    ((1, 2, -3), (), 0),
    ((1, 1), (1, 1), 2),
    ((1, -1), (), 1),
    ((2, 2, 2), (2, 2, 2), 6),
    ((1, 2), (2, 1), 1),
    ((1, 2), (1, 3), 0),
])
def test_exact_moment_examples(J, I, expected):
    assert exact_moment(J, I) == expected
    assert exact_moment(MomentQuery(J, I)) == expected


def test_query_rejects_zero():
    with pytest.raises(ValueError):
        MomentQuery((0, 1), (1,))


@given(index_lists, index_lists, seeds)
def test_moment_symmetries(J, I, seed):
    rng = np.random.default_rng(seed)
    m = exact_moment(J, I)
    assert m == exact_moment(tuple(rng.permutation(J)), tuple(rng.permutation(I)))
    assert m == exact_moment([-j for j in J], [-i for i in I])
    assert m == exact_moment(I, J)
    assert m >= 0


@given(index_lists, index_lists)
def test_signature_decides_vanishing(J, I):
    if len(J) != len(I):
        return
    sJ, sI = signature(np.array([J or [1]]), 5), signature(np.array([I or [1]]), 5)
    assert (exact_moment(J, I) != 0) == np.array_equal(sJ, sI)


def test_fourth_moment_by_monte_carlo():
    g = sample_g(21, 1, 1_000_000)
    mean, se_re, _ = monte_carlo_moment((1, 1), (1, 1), g)
    assert abs(mean.real - 2.0) <= 3 * se_re


def test_small_enumerations():
    assert set(enumerate_set(TupleSetSpec("A", 2, 2))) == {(1, -1), (-1, 1), (2, -2), (-2, 2)}
    for box in (1, 2, 3, 4):
        assert enumerate_set(TupleSetSpec("A_tilde", 3, box)) == \
            enumerate_set(TupleSetSpec("A", 3, box))


def test_enumeration_matches_definitions():
    box = 3
    vals = [v for v in range(-box, box + 1) if v]
    full = [t for t in itertools.product(vals, repeat=4) if sum(t) == 0]
    assert set(enumerate_set(TupleSetSpec("A", 4, box))) == set(full)
    assert set(enumerate_set(TupleSetSpec("A_tilde_c", 4, box))) == \
        {t for t in full if has_opposite_pair(t)}
    cj = {t for t in full if 2 in t and -2 in t}
    assert set(enumerate_set(TupleSetSpec("A_tilde_c_j", 4, box, j=2))) == cj
    lm = {t for t in full if t[0] == 2 and t[2] == -2}
    assert set(enumerate_set(TupleSetSpec("A_tilde_c_j_lm", 4, box, j=2, pair=(1, 3)))) == lm


def test_family_b_uses_lexicographic_exclusion():
    # the first couple takes everything with +-j at positions (1, 2)
    b12 = set(enumerate_set(TupleSetSpec("B", 4, 3, j=1, pair=(1, 2))))
    assert (1, -1, 2, -2) in b12 and (-1, 1, 3, -3) in b12
    # (1, -1, 1, -1) also has +-1 at (3, 4) but (1, 2) comes first
    b34 = set(enumerate_set(TupleSetSpec("B", 4, 3, j=1, pair=(3, 4))))
    assert (1, -1, 1, -1) not in b34 and (2, -2, 1, -1) in b34


@pytest.mark.parametrize("bad", [
    dict(family="C", n=3, box=2),
    dict(family="A", n=3, box=0),
    dict(family="A_tilde_c_j", n=3, box=2),
    dict(family="B", n=4, box=2, j=1, pair=(3, 2)),
])
def test_tuple_set_spec_validation(bad):
    with pytest.raises(ValueError):
        TupleSetSpec(**bad)


@pytest.mark.parametrize("n, box", [(3, 3), (4, 3), (5, 3)])
def test_disjoint_union_and_sign_symmetry(n, box):
    assert check_disjoint_union(n, box)
    assert check_sign_symmetry(n, box)


@pytest.mark.parametrize("n, box", [(4, 3), (5, 4)])
def test_partition(n, box):
    report = check_partition(n, box)
    assert report["ok"] and report["failing_j"] == []


def test_head_set_example():
    found, closed = head_set_characterization(2, 3)
    assert found == closed
    assert {(1, 2, -1, -2), (1, 2, -2, -1), (2, 1, -2, -1), (2, 1, -1, -2)} <= found


def brute_sweep(statement, box, n):
    """Full double loop over the statement's hypothesis pairs."""
    if statement in ("tildeA", "cor55"):
        fam = "A" if statement == "tildeA" else "A_tilde"
        rows = enumerate_set(TupleSetSpec(fam, n, box))
        pairs = [(J, I) for J in rows for I in rows if set(J) != set(I)]
        if statement == "tildeA":
            bad = [(J, I) for J, I in pairs
                   if exact_moment(J, I) and not has_opposite_pair(J) and not has_opposite_pair(I)]
        else:
            bad = [(J, I) for J, I in pairs if exact_moment(J, I)]
        return len(pairs), len(bad)

    def rest(t, j):
        r = list(t)
        r.remove(j)
        r.remove(-j)
        return set(r)

    fam = {j: enumerate_set(TupleSetSpec("A_tilde_c_j", 5, box, j=j)) for j in range(1, box + 1)}
    checked = bad = 0
    for j, i in itertools.product(range(1, box + 1), repeat=2):
        if statement == "orthtzv" and i != j:
            continue
        for J in fam[j]:
            for I in fam[i]:
                differ = set(J) != set(I) if statement == "orthtzv" else rest(J, j) != rest(I, i)
                if differ:
                    checked += 1
                    bad += exact_moment(J, I) != 0
    return checked, bad


@pytest.mark.parametrize("statement, box, n", [
    ("tildeA", 3, 3), ("tildeA", 2, 4), ("cor55", 3, 4), ("cor55", 2, 5),
    ("forp2", 2, 5), ("orthtzv", 2, 5),
])
def test_sweep_matches_brute_force(statement, box, n):
    report = verify_orthogonality(statement, box, n=n if statement in ("tildeA", "cor55") else None)
    assert (report["pairs_checked"], report["violations"]) == brute_sweep(statement, box, n)
    assert report["violations"] == 0


@pytest.mark.parametrize("statement, box", [
    ("tildeA", 3), ("cor55", 3), ("forp2", 3), ("orthtzv", 3), ("rem5", 4),
])
def test_orthogonality_statements(statement, box):
    report = verify_orthogonality(statement, box)
    assert report["violations"] == 0 and report["pairs_checked"] > 0


def test_sweep_hypotheses_matter():
    # dropping the opposite-pair exclusion produces nonzero moments
    rows = enumerate_set(TupleSetSpec("A", 4, 2))
    assert any(exact_moment(J, I) for J in rows for I in rows if set(J) != set(I))


def test_plain_set_difference_reading_fails():
    J, j, I, i, value = literal_set_difference_counterexample(4)
    assert set(J) - {j, -j} != set(I) - {i, -i}
    assert value == exact_moment(J, I) > 0


def test_unknown_statement():
    with pytest.raises(ValueError):
        verify_orthogonality("nope", 3)


@given(seed=seeds, n=st.sampled_from([2, 3, 4]))
def test_grouped_norm_matches_direct_expansion(seed, n):
    rng = np.random.default_rng(seed)
    rows = enumerate_set(TupleSetSpec("A_tilde", n, 2))
    coeffs = {J: complex(*rng.standard_normal(2)) for J in rows}
    direct = l2_norm_sq_direct(coeffs)
    assert abs(direct.imag) <= 1e-9 * abs(direct)
    assert l2_norm_sq_grouped(coeffs) == pytest.approx(direct.real, rel=1e-12)


def test_random_queries_shape(rng):
    qs = random_queries(30, 6, 5, rng)
    assert len(qs) == 30
    assert all(len(q.j_list) == len(q.i_list) <= 6 for q in qs)
    assert all(0 < abs(x) <= 5 for q in qs for x in q.j_list + q.i_list)
    assert sum(exact_moment(q) > 0 for q in qs) >= 10


def test_balanced_queries_have_nonzero_moments(rng):
    qs = random_queries(40, 6, 5, rng, balanced=True)
    assert all(exact_moment(q) > 0 for q in qs)
