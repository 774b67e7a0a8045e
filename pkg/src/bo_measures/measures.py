"""Gaussian measures mu_{k/2} and the truncated weighted densities F_{k/2,N,R}.

A draw is the random Fourier series sum_{n != 0} g_n |n|^{-k/2} e^{inx} cut
at |n| <= N, with g_n = (h_n + i l_n)/sqrt(2), h_n, l_n standard normal, so
that E|g_n|^2 = 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .fourier import FourierField, project_low


@dataclass(frozen=True)
class MeasureSpec:
    k: int
    N: int
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.N < 1:
            raise ValueError("need k >= 1 and N >= 1")


@dataclass(frozen=True)
class GaussianDraw:
    field: FourierField
    g: np.ndarray  # g_n for n = 1..N, leading axes are draws


def _mode_stream(seed: int, n: int, count: int) -> np.ndarray:
    rng = np.random.default_rng([seed, n])
    z = rng.standard_normal((count, 2))
    return (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)


def sample_g(seed: int, n_modes: int, count: int) -> np.ndarray:
    """Array (count, n_modes) of unit-variance complex Gaussians.

    Mode n uses its own generator seeded by (seed, n); draw i is the i-th
    variate of every mode stream, so the first draws do not depend on
    ``count`` and fields cut at different N share their low modes.
    """
    g = np.empty((count, n_modes), dtype=complex)
    for n in range(1, n_modes + 1):
        g[:, n - 1] = _mode_stream(seed, n, count)
    return g


def field_from_g(g: np.ndarray, k: float) -> FourierField:
    n = np.arange(1, g.shape[-1] + 1, dtype=float)
    return FourierField(g / n ** (k / 2.0))


def sample(spec: MeasureSpec) -> GaussianDraw:
    g = sample_g(spec.seed, spec.N, 1)[0]
    return GaussianDraw(field_from_g(g, spec.k), g)


def sample_batch(spec: MeasureSpec, count: int) -> GaussianDraw:
    """``count`` draws; draw 0 equals ``sample(spec)``."""
    g = sample_g(spec.seed, spec.N, count)
    return GaussianDraw(field_from_g(g, spec.k), g)


def write_draws_csv(path, draw: GaussianDraw) -> None:
    """Columns: draw, n, re_g, im_g."""
    g = np.atleast_2d(draw.g)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["draw", "n", "re_g", "im_g"])
        for i, row in enumerate(g):
            for n, value in enumerate(row, start=1):
                w.writerow([i, n, repr(float(value.real)), repr(float(value.imag))])


def read_draws_csv(path) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    count = int(rows[:, 0].max()) + 1
    modes = int(rows[:, 1].max())
    g = np.zeros((count, modes), dtype=complex)
    g[rows[:, 0].astype(int), rows[:, 1].astype(int) - 1] = rows[:, 2] + 1j * rows[:, 3]
    return g


def alpha_N(k: int, N: int) -> float:
    """E ||P_N phi_{k/2}||^2 in the H^{(k-1)/2} seminorm: 2 * sum_{n<=N} 1/n."""
    return 2.0 * float(np.sum(1.0 / np.arange(1, N + 1)))


def expected_l2_norm_sq(k: int, N: int) -> float:
    """E ||P_N phi_{k/2}||^2 in the norm sum_{j != 0} |c_j|^2."""
    return 2.0 * float(np.sum(np.arange(1, N + 1, dtype=float) ** (-k)))


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def chi(x):
    """Smooth bump: 1 on |x| <= 1, 0 on |x| >= 2."""
    return _smooth_step(2.0 - np.abs(np.asarray(x, dtype=float)))[()]


@dataclass(frozen=True)
class CutoffSpec:
    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")

    def __call__(self, x):
        return chi(np.asarray(x) / self.R)


def density_F(k: int, N: int, R: float, u: FourierField, energies=None):
    """F_{k/2,N,R}(u) with energies normalised to leading coefficient one.

    ``energies`` maps j -> EnergyFunctional for j = 0..k; by default the
    calibrated standard energies are used.
    """
    from .energies import standard_energy, MissingEnergyError

    def energy(j):
        if energies is not None:
            if j not in energies:
                raise MissingEnergyError(j)
            return energies[j]
        return standard_energy(j)

    cut = CutoffSpec(R)
    un = project_low(u, N) if u.n_max > N else u
    out = np.ones(un.batch_shape)
    for j in range(k - 1):
        out = out * cut(energy(j).normalized(un))
    out = out * cut(energy(k - 1).normalized(un) - alpha_N(k, N))
    top = energy(k)
    return (out * np.exp(-top.remainder(un) / top.lam))[()]
