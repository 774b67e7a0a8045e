"""Batch experiments: decay of G_N, identity suite, conservation, density
probes and recurrence.  Every report carries its seed and a content hash
of the configuration that produced it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import energies as en
from .flow import FlowSpec, trajectory
from .fourier import FourierField, extended, project_low, random_field, sobolev_norm_sq
from .measures import alpha_N, density_F, field_from_g, sample_g
from .monomials import VANISHING_TERMS, check_intpar_identities, check_vanishing_terms


def config_hash(config) -> str:
    """git-style blob hash of the canonical JSON form of a config."""
    if dataclasses.is_dataclass(config):
        config = dataclasses.asdict(config)
    payload = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha1(b"blob %d\0" % len(payload) + payload).hexdigest()


# -- decay of G_N -------------------------------------------------------------


@dataclass(frozen=True)
class DecayConfig:
    """``measure_k`` defaults to ``k`` (the measure mu_{k/2}).

    ``method`` is ``chain`` (chain rule), ``pstar`` (sum of p*_N integrals)
    or ``closed_form`` (k = 2 only).  ``precision="extended"`` evaluates in
    long double: G is a cancellation between terms far larger than G itself.
    """

    k: int
    n_grid: tuple = (16, 32, 64, 128, 256)
    samples: int = 2000
    seed: int = 0
    measure_k: int | None = None
    method: str = "chain"
    precision: str = "extended"
    chunk: int = 250

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(sorted(int(n) for n in self.n_grid)))
        if self.samples < 1:
            raise ValueError("need at least one sample (M >= 1)")
        if not self.n_grid or self.n_grid[0] < 1:
            raise ValueError("N grid must be non-empty and positive")
        if self.method not in ("chain", "pstar", "closed_form"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "closed_form" and self.k != 2:
            raise ValueError("the closed form exists for k = 2 only")
        if self.precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")


@dataclass
class DecayReport:
    k: int
    measure_k: int
    n_grid: tuple
    estimates: np.ndarray       # ||G_N||_{L^2(mu)}, one per N
    std_errors: np.ndarray      # delta method
    l4_estimates: np.ndarray    # ||G_N||_{L^4(mu)}
    diff_std_errors: np.ndarray  # paired SE of est(N_i) - est(N_{i+1})
    samples: int
    seed: int
    config_hash: str
    values: np.ndarray = field(repr=False)  # (samples, len(n_grid))

    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.estimates) < 0))

    def significant_decrease(self, z: float = 3.0) -> bool:
        drops = self.estimates[:-1] - self.estimates[1:]
        return bool(np.all(drops > z * self.diff_std_errors))

    def ratios(self, factor: int = 4) -> dict:
        """est(factor N) / est(N) for the N on the grid that have a partner."""
        idx = {n: i for i, n in enumerate(self.n_grid)}
        return {n: float(self.estimates[idx[factor * n]] / self.estimates[i])
                for n, i in idx.items() if factor * n in idx}

    def to_dict(self) -> dict:
        return {
            "k": self.k, "measure_k": self.measure_k, "n_grid": list(self.n_grid),
            "estimates": self.estimates.tolist(), "std_errors": self.std_errors.tolist(),
            "l4_estimates": self.l4_estimates.tolist(),
            "diff_std_errors": self.diff_std_errors.tolist(),
            "samples": self.samples, "seed": self.seed, "config_hash": self.config_hash,
        }

    def rows(self):
        """Long format: k, measure_k, N, estimate, std_error, l4, samples, seed."""
        return [(self.k, self.measure_k, n, float(e), float(s), float(q), self.samples, self.seed)
                for n, e, s, q in zip(self.n_grid, self.estimates, self.std_errors,
                                      self.l4_estimates)]


def _g_batch(cfg: DecayConfig, n: int, u: FourierField, energy) -> np.ndarray:
    if cfg.precision == "extended":
        u = extended(u)
    if cfg.method == "closed_form":
        out = en.g_closed_form_k2(n, u)
    elif cfg.method == "pstar":
        out = en.g_pstar(cfg.k, n, u, energy)
    else:
        out = en.g_value(cfg.k, n, u, energy)
    return np.asarray(out, dtype=float)


def decay_values(cfg: DecayConfig) -> np.ndarray:
    """G_N^{k/2}(u) for every draw and every N: shape (samples, len(n_grid)).

    Draw i uses the i-th variate of every per-mode stream, so the fields at
    different N share their low modes and differences are paired.
    """
    if cfg.k not in en.TEMPLATES:
        raise en.MissingEnergyError(cfg.k)
    energy = en.standard_energy(cfg.k)
    mk = cfg.measure_k if cfg.measure_k is not None else cfg.k
    g = sample_g(cfg.seed, max(cfg.n_grid), cfg.samples)
    out = np.empty((cfg.samples, len(cfg.n_grid)))
    for col, n in enumerate(cfg.n_grid):
        for start in range(0, cfg.samples, cfg.chunk):
            block = g[start:start + cfg.chunk, :n]
            out[start:start + len(block), col] = _g_batch(cfg, n, field_from_g(block, mk), energy)
    return out


def summarize_decay(cfg: DecayConfig, values: np.ndarray) -> DecayReport:
    M = values.shape[0]
    sq = values ** 2
    m2 = sq.mean(axis=0)
    est = np.sqrt(m2)
    cov = np.atleast_2d(np.cov(sq, rowvar=False, ddof=1)) if M > 1 else np.zeros((len(m2),) * 2)
    grad = np.divide(0.5, est, out=np.zeros_like(est), where=est > 0)
    se = np.sqrt(np.diag(cov)) / np.sqrt(M) * grad
    diff_se = []
    for i in range(len(est) - 1):
        g = np.zeros(len(est))
        g[i], g[i + 1] = grad[i], -grad[i + 1]
        diff_se.append(np.sqrt(max(g @ cov @ g, 0.0) / M))
    l4 = np.mean(values ** 4, axis=0) ** 0.25
    return DecayReport(
        k=cfg.k, measure_k=cfg.measure_k if cfg.measure_k is not None else cfg.k,
        n_grid=cfg.n_grid, estimates=est, std_errors=se, l4_estimates=l4,
        diff_std_errors=np.array(diff_se), samples=M, seed=cfg.seed,
        config_hash=config_hash(cfg), values=values)


def run_decay_study(k: int, n_grid=(16, 32, 64, 128, 256), M: int = 2000, seed: int = 0,
                    measure_k: int | None = None, **options) -> DecayReport:
    """Monte Carlo estimate of ||G_N^{k/2}||_{L^2(mu)} over a grid of N."""
    cfg = DecayConfig(k, tuple(n_grid), M, seed, measure_k, **options)
    return summarize_decay(cfg, decay_values(cfg))


# -- identity suite -------------------------------------------------------------


@dataclass
class IdentityReport:
    results: list  # (identity, n_max, N, residual)
    tol: float
    seed: int
    config_hash: str

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r[3] <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    def worst(self) -> dict:
        out: dict = {}
        for name, _, _, res in self.results:
            out[name] = max(out.get(name, 0.0), res)
        return out

    def to_dict(self) -> dict:
        return {"tol": self.tol, "seed": self.seed, "config_hash": self.config_hash,
                "checks": len(self.results), "failures": len(self.failures),
                "worst": self.worst()}


IDENTITIES = ("mire1", "mire3") + tuple(VANISHING_TERMS) + ("closed_form_k2",)


def run_identity_suite(seed: int = 0, n_fields: int = 100, n_max_choices=(8, 16, 32),
                       tol: float = 1e-10, corrupt: dict | None = None,
                       fields=None) -> IdentityReport:
    """Evaluate every exact identity on random fields.

    ``fields`` replaces the random ones; ``corrupt`` maps a vanishing-term
    id to replacement coefficients (mutation test hook).
    """
    rng = np.random.default_rng(seed)
    if fields is None:
        if n_fields < 1:
            raise ValueError("identity suite needs at least one field")
        fields = [random_field(n_max_choices[i % len(n_max_choices)], rng)
                  for i in range(n_fields)]
    fields = list(fields)
    if not fields:
        raise ValueError("identity suite needs at least one field")
    corrupt = corrupt or {}
    results = []
    for i, u in enumerate(fields):
        n_max = u.n_max
        m = 1 + i % 3
        r = check_intpar_identities(u, m, n_max)
        results += [("mire1", n_max, n_max, r.mire1), ("mire3", n_max, n_max, r.mire3)]
        n = int(rng.integers(max(1, n_max // 2), n_max + 1))
        for which in VANISHING_TERMS:
            res = check_vanishing_terms(u, n, which, corrupt.get(which))
            results.append((which, n_max, n, res))
        a, b = en.g_value(2, n, u), en.g_closed_form_k2(n, u)
        results.append(("closed_form_k2", n_max, n, float(abs(a - b) / max(abs(b), 1e-300))))
    cfg = {"seed": seed, "n_fields": len(fields), "n_max_choices": list(n_max_choices),
           "tol": tol, "corrupt": corrupt}
    return IdentityReport(results, tol, seed, config_hash(cfg))


# -- conservation along the truncated flow ----------------------------------------


def conservation_drift(u0: FourierField, N: int = 64, t_final: float = 1.0,
                       dt: float = 1e-3, tol: float = 1e-10, stride: int = 10) -> dict:
    """Largest relative change of ||P_N u||^2 and E_{1/2}(P_N u) along Phi^N_t."""
    E = en.standard_energy(1)
    spec = FlowSpec("BO", N, dt, tol, t_final)
    l2, e12 = [], []
    for _, u in trajectory(spec, u0, t_final, stride):
        un = project_low(u, N)
        l2.append(sobolev_norm_sq(un, 0.0))
        e12.append(E.value(un))
    l2, e12 = np.array(l2), np.array(e12)
    return {"l2": float(np.max(np.abs(l2 - l2[0])) / abs(l2[0])),
            "e_half": float(np.max(np.abs(e12 - e12[0])) / abs(e12[0])),
            "checkpoints": len(l2)}


# -- densities ------------------------------------------------------------------


def run_density_probe(k: int, n_grid, R: float, samples: int, seed: int = 0,
                      q_values=(2, 4)) -> dict:
    """F_{k/2,N,R} on shared draws.

    Each row carries the L^q distances to the largest N (``Lq_to_ref``) and,
    when 2N is also on the grid, to F_{k/2,2N,R} (``Lq_to_2N``).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    n_grid = sorted(int(n) for n in n_grid)
    g = sample_g(seed, n_grid[-1], samples)
    F = {n: np.asarray(density_F(k, n, R, field_from_g(g[:, :n], k)), dtype=float)
         for n in n_grid}
    ref = F[n_grid[-1]]
    rows = []
    for n in n_grid:
        row = {"N": n, "mean": float(F[n].mean()), "alpha_N": alpha_N(k, n)}
        for q in q_values:
            row[f"L{q}_to_ref"] = float(np.mean(np.abs(F[n] - ref) ** q) ** (1.0 / q))
            nxt = F.get(2 * n)
            row[f"L{q}_to_2N"] = (float(np.mean(np.abs(F[n] - nxt) ** q) ** (1.0 / q))
                                  if nxt is not None else None)
        rows.append(row)
    cfg = {"k": k, "n_grid": n_grid, "R": R, "samples": samples, "seed": seed}
    return {"rows": rows, "seed": seed, "config_hash": config_hash(cfg)}


# -- recurrence -------------------------------------------------------------------


@dataclass
class RecurrenceReport:
    equation: str
    s: float
    times: np.ndarray
    distances: np.ndarray       # ||u(t) - u(0)||_{H^s}
    window_minima: np.ndarray
    initial_norm: float
    seed: int | None
    config_hash: str

    @property
    def running_minimum(self) -> np.ndarray:
        return np.minimum.accumulate(self.window_minima) if len(self.window_minima) else \
            self.window_minima

    def to_dict(self) -> dict:
        return {"equation": self.equation, "s": self.s, "initial_norm": self.initial_norm,
                "window_minima": self.window_minima.tolist(),
                "running_minimum": self.running_minimum.tolist(),
                "samples": len(self.distances), "seed": self.seed,
                "config_hash": self.config_hash}

    def rows(self):
        return [(self.equation, float(t), float(d)) for t, d in zip(self.times, self.distances)]


def run_recurrence(equation: str, u0, t_final: float, s: float, window: int = 50,
                   N: int = 64, dt: float = 1e-2, stride: int = 10, tol: float = 1e-6,
                   k: int | None = None, seed: int | None = None) -> RecurrenceReport:
    """Distances ||u(t) - u0||_{H^s} every ``stride`` steps, minima per window.

    ``u0`` is a FourierField, or None to draw from mu_{k/2} (k >= 4) with
    ``seed``.  Drawn data reject s >= (k-1)/2, where the draw has infinite
    norm almost surely.
    """
    if u0 is None:
        if k is None or k < 4:
            raise ValueError("drawn initial data need k >= 4")
        if seed is None:
            seed = 0
        u0 = field_from_g(sample_g(seed, N, 1)[0], k)
    if k is not None and s >= (k - 1) / 2:
        raise ValueError(f"s={s} is too large for data drawn with k={k} (need s < {(k - 1) / 2})")
    if window < 1:
        raise ValueError("window must be >= 1")
    u0 = u0.resized(max(u0.n_max, N))
    cfg = {"equation": equation, "t_final": t_final, "s": s, "window": window, "N": N,
           "dt": dt, "stride": stride, "tol": tol, "k": k, "seed": seed,
           "u0": None if seed is not None else np.round(u0.coeffs, 15).tolist()}
    cfg["u0"] = str(cfg["u0"])
    times, dist = [], []
    if t_final == 0:
        times, dist = [0.0], [0.0]
    else:
        spec = FlowSpec(equation, N, dt, tol, t_final)
        for t, u in trajectory(spec, u0, t_final, stride):
            times.append(t)
            dist.append(float(np.sqrt(sobolev_norm_sq(u - u0, s))))
    dist = np.array(dist)
    later = dist[1:] if len(dist) > 1 else dist
    minima = np.array([later[i:i + window].min() for i in range(0, len(later), window)])
    return RecurrenceReport(equation, s, np.array(times), dist, minima,
                            float(np.sqrt(sobolev_norm_sq(u0, s))), seed, config_hash(cfg))
