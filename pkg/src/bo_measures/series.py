"""Lattice sums over 0 < |j_i| <= N with a constraint on |j_1 + ... + j_m|.

A sum of the form sum_{|j_1+...+j_m| > N} w_1(j_1)...w_m(j_m) is evaluated
exactly by convolving the weight vectors of j_2..j_m (the distribution of
their sum) and pairing the result with w_1 through prefix sums.  This costs
O(N) for double sums and O((mN)^2) beyond, instead of O(N^m).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

LEMMAS = ("algebrTV", "algebrTV2", "serienew", "sersaut", "generic")
RATES = {
    "algebrTV": lambda n: np.log(n) / n,
    "algebrTV2": lambda n: np.log(n) / n,
    "serienew": lambda n: 1.0 / np.sqrt(n),
    "sersaut": lambda n: n * np.log(n),
}
MAX_N_DOUBLE = 2 ** 14
MAX_N_MULTI = 2 ** 8


class CostGuardError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSumSpec:
    """``exponents`` are used by ``generic`` (weights |j_i|^{-a_i}); ``m`` by algebrTV2.

    ``constraint`` is ``"gt"`` (|sum| > N) or ``"le"`` (|sum| <= N).
    """

    lemma: str
    N: int
    m: int = 2
    exponents: tuple = field(default=())
    constraint: str = "gt"

    def __post_init__(self):
        if self.lemma not in LEMMAS:
            raise ValueError(f"unknown lemma {self.lemma!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.constraint not in ("gt", "le"):
            raise ValueError("constraint must be 'gt' or 'le'")
        if self.lemma == "algebrTV2" and self.m < 2:
            raise ValueError("algebrTV2 needs m >= 2")
        if self.lemma == "generic" and len(self.exponents) < 2:
            raise ValueError("generic sums need at least two exponents")

    @property
    def arity(self) -> int:
        if self.lemma == "algebrTV2":
            return self.m
        if self.lemma == "generic":
            return len(self.exponents)
        return 2

    def weight_exponents(self) -> tuple:
        """a_i with weight |j_i|^{-a_i} for each index."""
        if self.lemma == "generic":
            return tuple(self.exponents)
        if self.lemma == "algebrTV2":
            return (1,) + (2,) * (self.m - 1)
        if self.lemma == "sersaut":
            return (-1, 2)
        return (1, 2)  # algebrTV; serienew is handled separately


def _weights(N: int, a: float) -> np.ndarray:
    """w(j) = |j|^{-a} on j = -N..N, zero at j = 0."""
    j = np.abs(np.arange(-N, N + 1, dtype=float))
    w = np.zeros_like(j)
    w[j > 0] = j[j > 0] ** (-float(a))
    return w


def _tail_pairing(w1: np.ndarray, dist: np.ndarray, N: int, constraint: str) -> np.ndarray:
    """For each j_1 = -N..N: sum of dist(s) over s with |j_1 + s| > N (or <= N).

    ``dist`` is indexed by s = -K..K.
    """
    K = (dist.shape[0] - 1) // 2
    prefix = np.concatenate([[0.0], np.cumsum(dist)])  # prefix[i] = sum dist[:i]
    total = prefix[-1]
    j = np.arange(-N, N + 1)
    # |j + s| <= N  <=>  s in [-N - j, N - j]; clip to the support -K..K
    lo = np.clip(-N - j + K, 0, 2 * K + 1)
    hi = np.clip(N - j + K + 1, 0, 2 * K + 1)
    inside = prefix[hi] - prefix[lo]
    return inside if constraint == "le" else total - inside


def row_sums(spec: LatticeSumSpec) -> np.ndarray:
    """For each j_1 = -N..N the sum over the remaining indices (weighted by w_1)."""
    N = spec.N
    _guard(spec)
    if spec.lemma == "serienew":
        a = (2, 2)
    else:
        a = spec.weight_exponents()
    dist = _weights(N, a[1])
    for e in a[2:]:
        dist = np.convolve(dist, _weights(N, e))
    return _weights(N, a[0]) * _tail_pairing(_weights(N, a[0]), dist, N, spec.constraint)


def _guard(spec: LatticeSumSpec) -> None:
    limit = MAX_N_DOUBLE if spec.arity == 2 else MAX_N_MULTI
    if spec.N > limit:
        raise CostGuardError(
            f"N={spec.N} exceeds the cost guard {limit} for a {spec.arity}-fold sum")


def evaluate(spec: LatticeSumSpec) -> float:
    """Value of the lattice sum named by ``spec``."""
    rows = row_sums(spec)
    if spec.lemma == "serienew":
        return math.fsum(np.sqrt(rows))
    return math.fsum(rows)


def brute_force(spec: LatticeSumSpec) -> float:
    """Direct loop over all index tuples (small N only)."""
    import itertools

    N = spec.N
    vals = [v for v in range(-N, N + 1) if v]
    if spec.lemma == "serienew":
        total = 0.0
        for j in vals:
            inner = sum(1.0 / (j * j * l * l) for l in vals if abs(j + l) > N)
            total += math.sqrt(inner)
        return total
    a = spec.weight_exponents()
    terms = []
    for t in itertools.product(vals, repeat=len(a)):
        s = abs(sum(t))
        if (s > N) == (spec.constraint == "gt"):
            terms.append(math.prod(abs(x) ** (-e) for x, e in zip(t, a)))
    return math.fsum(terms)


def positive_orbit_sum(N: int) -> float:
    """algebrTV via its symmetry reduction.

    On 0 < |j|, |l| <= N the constraint |j + l| > N forces j, l to share a
    sign, and (j, l) -> (-j, -l) preserves the summand, so the sum is twice
    the sum over j, l > 0 with j + l > N.
    """
    total = []
    for j in range(1, N + 1):
        l = np.arange(max(N - j + 1, 1), N + 1, dtype=float)
        total.append(np.sum(1.0 / (j * l * l)))
    return 2.0 * math.fsum(total)


def scaled_value(lemma: str, N: int, value: float) -> float:
    return float(value / RATES[lemma](N))


@dataclass(frozen=True)
class RateFit:
    lemma: str
    grid: tuple
    values: tuple
    scaled: tuple
    exponent: float
    log_exponent: float
    sup_scaled: float

    @property
    def bounded(self) -> bool:
        """Supremum of the scaled values is at most 10x the first one."""
        return self.sup_scaled <= 10.0 * self.scaled[0]

    def rows(self):
        return [(self.lemma, n, v, s) for n, v, s in zip(self.grid, self.values, self.scaled)]


def geometric_grid(lo: int, hi: int, points: int) -> tuple:
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    return tuple(int(n) for n in grid)


def fit_rate(lemma: str, grid, m: int = 2) -> RateFit:
    """Least squares log S = c + p log N + q log log N, plus sup of S / rate.

    Acceptance uses boundedness of S / rate; the fitted powers are reported
    for information only.
    """
    grid = tuple(int(n) for n in grid)
    if len(grid) < 6:
        raise ValueError("rate fits need at least 6 grid points")
    if min(grid) < 3:
        raise ValueError("grid must start at N >= 3 (log log N must be positive)")
    values = tuple(evaluate(LatticeSumSpec(lemma, n, m=m)) for n in grid)
    scaled = tuple(scaled_value(lemma, n, v) for n, v in zip(grid, values))
    logn = np.log(np.array(grid, dtype=float))
    X = np.column_stack([np.ones_like(logn), logn, np.log(logn)])
    coef = np.linalg.lstsq(X, np.log(values), rcond=None)[0]
    return RateFit(lemma if lemma != "algebrTV2" else f"algebrTV2(m={m})", grid, values,
                   scaled, float(coef[1]), float(coef[2]), max(scaled))


def integral_bound_holds(max_n: int, C: float = 2.0) -> tuple:
    """Check sum_{k=a}^N 1/k^2 <= C (N - a + 1) / (a N) for all 1 <= a <= N <= max_n.

    Returns (holds, worst ratio lhs / rhs).
    """
    k = np.arange(1, max_n + 1, dtype=float)
    tail = np.cumsum((1.0 / k ** 2)[::-1])[::-1]  # tail[a-1] = sum_{k>=a}^{max_n}
    worst = 0.0
    for N in range(1, max_n + 1):
        a = k[:N]
        lhs = tail[:N] - (tail[N] if N < max_n else 0.0)
        rhs = C * (N - a + 1) / (a * N)
        worst = max(worst, float(np.max(lhs / rhs)))
    return worst <= 1.0 + 1e-12, worst


def write_rates_csv(path, fits) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lemma", "N", "value", "scaled_value"])
        for fit in fits:
            for row in fit.rows():
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
