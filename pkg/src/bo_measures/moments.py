"""Exact moments of products of independent circular Gaussians, and the
zero-sum index sets on which the orthogonality relations are stated.

Variables are g_n, n != 0, with g_{-n} = conj(g_n), the g_n (n > 0)
independent and E|g_n|^2 = 1.  For such a variable E[g^a conj(g)^b] is
a! when a == b and 0 otherwise.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

IndexTuple = tuple  # of non-zero ints


@dataclass(frozen=True)
class MomentQuery:
    """E[g_{j_1}...g_{j_n} conj(g_{i_1}...g_{i_m})]."""

    j_list: tuple
    i_list: tuple

    def __post_init__(self):
        object.__setattr__(self, "j_list", tuple(int(x) for x in self.j_list))
        object.__setattr__(self, "i_list", tuple(int(x) for x in self.i_list))
        if 0 in self.j_list or 0 in self.i_list:
            raise ValueError("indices must be non-zero")


def _fold(j_list, i_list):
    """Per positive mode n: (#factors equal to g_n, #factors equal to conj g_n)."""
    r, s = Counter(), Counter()
    for j in j_list:
        if j == 0:
            raise ValueError("indices must be non-zero")
        (r if j > 0 else s)[abs(j)] += 1
    for i in i_list:
        if i == 0:
            raise ValueError("indices must be non-zero")
        (s if i > 0 else r)[abs(i)] += 1
    return r, s


def exact_moment(j_list, i_list=()) -> int:
    """Exact value of E[prod g_j * conj(prod g_i)] (a non-negative integer)."""
    if isinstance(j_list, MomentQuery):
        j_list, i_list = j_list.j_list, j_list.i_list
    r, s = _fold(j_list, i_list)
    out = 1
    for n in set(r) | set(s):
        if r[n] != s[n]:
            return 0
        out *= math.factorial(r[n])
    return out


def signature(tuples: np.ndarray, box: int) -> np.ndarray:
    """Rows sig[n-1] = #{entries == n} - #{entries == -n}, n = 1..box.

    E[g_J conj g_I] != 0 exactly when sig(J) == sig(I).
    """
    t = np.asarray(tuples)
    n = np.arange(1, box + 1)
    return ((t[..., None] == n).sum(axis=-2) - (t[..., None] == -n).sum(axis=-2)).astype(np.int64)


# -- index sets -------------------------------------------------------------


FAMILIES = ("A", "A_tilde", "A_tilde_c", "A_tilde_c_j", "A_tilde_c_j_lm", "B")


@dataclass(frozen=True)
class TupleSetSpec:
    """One of the index families, restricted to 0 < |entries| <= box.

    ``j`` is used by A_tilde_c_j, A_tilde_c_j_lm and B; ``pair`` = (l, m)
    (1-based, l < m) by A_tilde_c_j_lm and B.  ``head_gt`` optionally keeps
    only tuples with |t_1 + t_2| > head_gt.
    """

    family: str
    n: int
    box: int
    j: int | None = None
    pair: tuple | None = None
    head_gt: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.box < 1 or self.n < 1:
            raise ValueError("need n >= 1 and box >= 1")
        if self.family in ("A_tilde_c_j", "A_tilde_c_j_lm", "B") and not self.j:
            raise ValueError(f"family {self.family} needs a non-zero j")
        if self.family in ("A_tilde_c_j_lm", "B"):
            if self.pair is None or not 1 <= self.pair[0] < self.pair[1] <= self.n:
                raise ValueError("pair must satisfy 1 <= l < m <= n")


def zero_sum_tuples(n: int, box: int) -> np.ndarray:
    """A_n within the box, lexicographic order, shape (count, n)."""
    vals = np.concatenate([np.arange(-box, 0), np.arange(1, box + 1)])
    if n == 1:
        return np.zeros((0, 1), dtype=np.int64)
    head = np.array(list(itertools.product(vals, repeat=n - 1)), dtype=np.int64)
    last = -head.sum(axis=1)
    keep = (last != 0) & (np.abs(last) <= box)
    return np.concatenate([head[keep], last[keep, None]], axis=1)


def opposite_pair_mask(t: np.ndarray) -> np.ndarray:
    """True where some t_k == -t_l (k != l)."""
    t = np.asarray(t)
    eq = t[:, :, None] == -t[:, None, :]
    return eq.any(axis=(1, 2))


def pair_mask(t: np.ndarray, j: int, l: int, m: int) -> np.ndarray:
    """t_l == j and t_m == -j (1-based positions)."""
    return (t[:, l - 1] == j) & (t[:, m - 1] == -j)


def _contains_pm(t: np.ndarray, j: int) -> np.ndarray:
    return (t == j).any(axis=1) & (t == -j).any(axis=1)


def enumerate_array(spec: TupleSetSpec) -> np.ndarray:
    t = zero_sum_tuples(spec.n, spec.box)
    if spec.head_gt is not None:
        t = t[np.abs(t[:, 0] + t[:, 1]) > spec.head_gt]
    if spec.family == "A":
        return t
    opp = opposite_pair_mask(t)
    if spec.family == "A_tilde":
        return t[~opp]
    t = t[opp]
    if spec.family == "A_tilde_c":
        return t
    j = spec.j
    if spec.family == "A_tilde_c_j":
        return t[_contains_pm(t, j)]
    l, m = spec.pair
    if spec.family == "A_tilde_c_j_lm":
        return t[pair_mask(t, j, l, m)]
    # B^{c,j,(l0,m0)}: union over +-j at (l0, m0) minus all earlier B's
    earlier = np.zeros(len(t), dtype=bool)
    for a, b in itertools.combinations(range(1, spec.n + 1), 2):
        here = (pair_mask(t, j, a, b) | pair_mask(t, -j, a, b)) & ~earlier
        if (a, b) == (l, m):
            return t[here]
        earlier |= here
    raise AssertionError("unreachable")


def enumerate_set(spec: TupleSetSpec) -> list:
    """Exact enumeration as a list of int tuples."""
    return [tuple(int(x) for x in row) for row in enumerate_array(spec)]


def _as_set(t) -> set:
    return {tuple(int(x) for x in row) for row in t}


# -- structural laws --------------------------------------------------------


def check_disjoint_union(n: int, box: int) -> bool:
    """A_n is the disjoint union of A~_n and A~_n^c."""
    a = _as_set(enumerate_array(TupleSetSpec("A", n, box)))
    t = _as_set(enumerate_array(TupleSetSpec("A_tilde", n, box)))
    c = _as_set(enumerate_array(TupleSetSpec("A_tilde_c", n, box)))
    return a == t | c and not (t & c)


def check_partition(n: int, box: int) -> dict:
    """A~_n^{c,j} is the disjoint union over l < m of B^{c,j,(l,m)}, j = 1..box."""
    bad = []
    for j in range(1, box + 1):
        whole = _as_set(enumerate_array(TupleSetSpec("A_tilde_c_j", n, box, j=j)))
        parts = [_as_set(enumerate_array(TupleSetSpec("B", n, box, j=j, pair=p)))
                 for p in itertools.combinations(range(1, n + 1), 2)]
        union = set().union(*parts)
        overlap = sum(len(p) for p in parts) != len(union)
        if union != whole or overlap:
            bad.append(j)
    return {"n": n, "box": box, "ok": not bad, "failing_j": bad}


def check_sign_symmetry(n: int, box: int) -> bool:
    """A~_n^{c,j} == A~_n^{c,-j} for every j."""
    return all(
        _as_set(enumerate_array(TupleSetSpec("A_tilde_c_j", n, box, j=j)))
        == _as_set(enumerate_array(TupleSetSpec("A_tilde_c_j", n, box, j=-j)))
        for j in range(1, box + 1))


def head_set_characterization(N: int, box: int) -> tuple:
    """(enumerated set, closed-form set) for {t in A~_4^c : |t_1 + t_2| > N}."""
    found = _as_set(enumerate_array(TupleSetSpec("A_tilde_c", 4, box, head_gt=N)))
    vals = [v for v in range(-box, box + 1) if v]
    closed = set()
    for k, h in itertools.product(vals, repeat=2):
        if abs(h + k) > N:
            closed.add((k, h, -k, -h))
            closed.add((k, h, -h, -k))
    return found, closed


# -- orthogonality sweeps ---------------------------------------------------


STATEMENTS = ("tildeA", "cor55", "forp2", "orthtzv", "rem5")


def _balanced_pairs(left: np.ndarray, right: np.ndarray, box: int):
    """Index pairs (a, b) with sig(left[a]) == sig(right[b]).

    Every other pair has moment zero (some mode is unbalanced), so these
    are the only pairs whose moment needs evaluating.
    """
    sl, sr = signature(left, box), signature(right, box)
    groups = defaultdict(list)
    for b, row in enumerate(map(bytes, sr)):
        groups[row].append(b)
    for a, row in enumerate(map(bytes, sl)):
        for b in groups.get(row, ()):
            yield a, b


def _rest(t, j) -> frozenset:
    """Entries left after removing one j and one -j (as a set)."""
    rest = list(t)
    rest.remove(j)
    rest.remove(-j)
    return frozenset(rest)


def verify_orthogonality(statement: str, box: int, n=None, max_examples: int = 20) -> dict:
    """Exhaustively check one orthogonality statement inside the box.

    Returns ``{statement, box, pairs_checked, violations, examples}``; the
    statement holds on the box iff ``violations == 0``.
    """
    if statement not in STATEMENTS:
        raise ValueError(f"unknown statement {statement!r}")
    if box < 1:
        raise ValueError("box must be >= 1")
    examples = []
    checked = 0
    violations = 0

    def record(J, I, value):
        nonlocal violations
        violations += 1
        if len(examples) < max_examples:
            examples.append({"J": list(J), "I": list(I), "moment": value})

    if statement == "rem5":
        for i, j in itertools.combinations(range(1, box + 1), 2):
            a = _as_set(enumerate_array(TupleSetSpec("A_tilde_c_j", 5, box, j=i)))
            b = _as_set(enumerate_array(TupleSetSpec("A_tilde_c_j", 5, box, j=j)))
            checked += 1
            for t in sorted(a & b):
                record(t, t, None)
        return _report(statement, box, checked, violations, examples, n=5)

    if statement in ("tildeA", "cor55"):
        sizes = [n] if isinstance(n, int) else list(n or ([3, 4] if statement == "tildeA" else [2, 3, 4, 5]))
        for size in sizes:
            fam = "A" if statement == "tildeA" else "A_tilde"
            t = enumerate_array(TupleSetSpec(fam, size, box))
            rows = [tuple(int(x) for x in r) for r in t]
            sets = [frozenset(r) for r in rows]
            opp = opposite_pair_mask(t) if len(t) else np.zeros(0, bool)
            # pairs with distinct sets, all of which are hypothesis pairs
            same = Counter(sets)
            checked += len(rows) ** 2 - sum(c * c for c in same.values())
            for a, b in _balanced_pairs(t, t, box):
                if sets[a] == sets[b]:
                    continue
                value = exact_moment(rows[a], rows[b])
                if value and not (statement == "tildeA" and (opp[a] or opp[b])):
                    record(rows[a], rows[b], value)
        return _report(statement, box, checked, violations, examples, n=sizes)

    # forp2 / orthtzv on A~_5^{c,j}
    fam = {j: enumerate_array(TupleSetSpec("A_tilde_c_j", 5, box, j=j)) for j in range(1, box + 1)}
    rows = {j: [tuple(int(x) for x in r) for r in t] for j, t in fam.items()}
    for j, i in itertools.product(range(1, box + 1), repeat=2):
        if statement == "orthtzv" and i != j:
            continue
        if statement == "orthtzv":
            key_j = [frozenset(r) for r in rows[j]]
            key_i = key_j
        else:
            key_j = [_rest(r, j) for r in rows[j]]
            key_i = [_rest(r, i) for r in rows[i]]
        cj, ci = Counter(key_j), Counter(key_i)
        checked += len(key_j) * len(key_i) - sum(cj[k] * ci[k] for k in cj)
        for a, b in _balanced_pairs(fam[j], fam[i], box):
            if key_j[a] == key_i[b]:
                continue
            value = exact_moment(rows[j][a], rows[i][b])
            if value:
                record(rows[j][a], rows[i][b], value)
    return _report(statement, box, checked, violations, examples, n=5)


def _report(statement, box, checked, violations, examples, n):
    return {"statement": statement, "box": box, "n": n, "pairs_checked": int(checked),
            "violations": int(violations), "examples": examples}


def literal_set_difference_counterexample(box: int = 4):
    """A pair that breaks the reading of the forp=2 hypothesis as a plain set
    difference {J} minus {j, -j}, or None if the box has none.

    Used to document why the sweep removes one j and one -j instead.
    """
    fam = {j: [tuple(int(x) for x in r)
               for r in enumerate_array(TupleSetSpec("A_tilde_c_j", 5, box, j=j))]
           for j in range(1, box + 1)}
    for j, i in itertools.product(range(1, box + 1), repeat=2):
        for J in fam[j]:
            for I in fam[i]:
                if set(J) - {j, -j} != set(I) - {i, -i} and exact_moment(J, I):
                    return J, j, I, i, exact_moment(J, I)
    return None


# -- L^2(dp) norms of multilinear sums ---------------------------------------


def l2_norm_sq_direct(coeffs: dict) -> complex:
    """E|sum_J c_J g_J|^2 by expanding every pair with ``exact_moment``."""
    items = list(coeffs.items())
    total = 0.0
    for J, cJ in items:
        for I, cI in items:
            m = exact_moment(J, I)
            if m:
                total += cJ * np.conj(cI) * m
    return total


def l2_norm_sq_grouped(coeffs: dict) -> float:
    """Same quantity for J ranging in A~_n: sum over multisets M of |C_M|^2 E|g_M|^2.

    C_M adds the coefficients of all orderings of M; distinct multisets
    are orthogonal there.
    """
    grouped = defaultdict(complex)
    for J, c in coeffs.items():
        grouped[tuple(sorted(J))] += c
    total = 0.0
    for M, c in grouped.items():
        total += abs(c) ** 2 * exact_moment(M, M)
    return total


# -- Monte Carlo oracle -----------------------------------------------------


def monte_carlo_moment(j_list, i_list, g: np.ndarray) -> tuple:
    """Sample mean and standard errors (re, im) of g_J conj(g_I).

    ``g`` has shape (draws, modes) holding g_1..g_modes.
    """
    x = np.ones(g.shape[0], dtype=complex)
    for j in j_list:
        x *= g[:, j - 1] if j > 0 else np.conj(g[:, -j - 1])
    for i in i_list:
        x *= np.conj(g[:, i - 1]) if i > 0 else g[:, -i - 1]
    root = np.sqrt(g.shape[0])
    return x.mean(), x.real.std(ddof=1) / root, x.imag.std(ddof=1) / root


def random_queries(count: int, max_n: int, box: int, rng: np.random.Generator,
                   balanced: bool = False) -> list:
    """Queries with equal lengths, mixing balanced and unbalanced ones.

    One third permute J, one third swap an opposite pair (a, -a) for
    another (b, -b), the rest draw I independently.  With ``balanced``
    only the first two kinds are used, so every moment is nonzero.
    """
    vals = np.concatenate([np.arange(-box, 0), np.arange(1, box + 1)])
    out = []
    for q in range(count):
        n = int(rng.integers(1, max_n + 1))
        kind = q % 2 if balanced else q % 3
        if kind == 1 and n >= 2:
            base = list(rng.choice(vals, n - 2))
            a, b = rng.choice(np.arange(1, box + 1), 2)
            J = base + [int(a), -int(a)]
            I = list(rng.permutation(base + [int(b), -int(b)]))
        else:
            J = list(rng.choice(vals, n))
            I = list(rng.permutation(J)) if kind == 0 or balanced else list(rng.choice(vals, n))
        out.append(MomentQuery(tuple(J), tuple(I)))
    return out
