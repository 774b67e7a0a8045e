"""Galerkin-truncated Benjamin-Ono and KdV flows.

    d/dt u + L u + P_N((P_N u) d/dx (P_N u)) = 0

with L = H d^2/dx^2 (BO) or d^3/dx^3 (KdV).  Modes above N are kept and
rotate under the linear part only.  Time stepping uses an integrating
factor (exact linear phase) with classical RK4 stages for the nonlinearity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .fourier import FourierField, complex_dtype, fft_size, sobolev_norm_sq


class FlowError(RuntimeError):
    """The step size underflowed before the drift criterion was met."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t={t_reached:.6g})")
        self.t_reached = t_reached


@dataclass(frozen=True)
class FlowSpec:
    equation: str = "BO"
    N: int = 64
    dt: float = 1e-3
    tol: float = 1e-10
    t_final: float = 1.0
    max_halvings: int = 12

    def __post_init__(self):
        if self.equation not in ("BO", "KdV"):
            raise ValueError("equation must be 'BO' or 'KdV'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")


def linear_symbol(equation: str, n_max: int) -> np.ndarray:
    """Symbol of the linear part of d/dt on positive modes 1..n_max."""
    j = np.arange(1, n_max + 1, dtype=float)
    if equation == "BO":
        return -1j * j * j
    return 1j * j ** 3


def truncated_square(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Modes 1..n of (P_n u)^2, exact (grid > 3n points)."""
    n_in = min(n, coeffs.shape[-1])
    size = fft_size(3 * n + 1)
    buf = np.zeros(coeffs.shape[:-1] + (size // 2 + 1,), dtype=complex_dtype(coeffs))
    buf[..., 1 : n_in + 1] = coeffs[..., :n_in]
    vals = np.fft.irfft(buf, n=size, axis=-1) * size
    sq = np.fft.rfft(vals * vals, axis=-1) / size
    out = np.zeros(coeffs.shape[:-1] + (n,), dtype=buf.dtype)
    top = min(n, sq.shape[-1] - 1)
    out[..., :top] = sq[..., 1 : top + 1]
    return out


def _nonlinear(coeffs: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(coeffs)
    m = min(n, coeffs.shape[-1])
    j = np.arange(1, m + 1)
    out[..., :m] = -0.5j * j * truncated_square(coeffs, n)[..., :m]
    return out


def state_size(spec: FlowSpec, u: FourierField) -> int:
    return max(spec.N, u.n_max)


def vector_field(spec: FlowSpec, u: FourierField, nonlinear: bool = True) -> FourierField:
    """Right-hand side of the truncated equation."""
    c = u.resized(state_size(spec, u)).coeffs
    rhs = linear_symbol(spec.equation, c.shape[-1]) * c
    if nonlinear:
        rhs = rhs + _nonlinear(c, spec.N)
    return FourierField(rhs)


def full_vector_field(u: FourierField) -> FourierField:
    """Untruncated BO right-hand side -H u_xx - u u_x (n_max doubles)."""
    n = u.n_max
    c = u.resized(2 * n).coeffs
    return FourierField(linear_symbol("BO", 2 * n) * c + _nonlinear(c, 2 * n))


def _if_rk4_step(c, lin, h, n, nonlinear):
    e_half = np.exp(lin * h / 2)
    e_full = e_half * e_half
    if not nonlinear:
        return e_full * c
    k1 = _nonlinear(c, n)
    k2 = _nonlinear(e_half * (c + 0.5 * h * k1), n)
    k3 = _nonlinear(e_half * c + 0.5 * h * k2, n)
    k4 = _nonlinear(e_full * c + h * e_half * k3, n)
    return e_full * c + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)


def _l2(c):
    return 2.0 * np.sum(np.abs(c) ** 2, axis=-1)


def _attempt(spec, c0, t, dt, nonlinear, checkpoints):
    steps = max(1, math.ceil(abs(t) / dt - 1e-9)) if t != 0 else 0
    h = t / steps if steps else 0.0
    lin = linear_symbol(spec.equation, c0.shape[-1])
    norm0 = _l2(c0)
    scale = np.where(norm0 > 0, norm0, 1.0)
    c = c0
    out = []
    for i in range(1, steps + 1):
        c = _if_rk4_step(c, lin, h, spec.N, nonlinear)
        drift = np.max(np.abs(_l2(c) - norm0) / scale)
        if not np.isfinite(drift) or drift > spec.tol:
            return None, i * h, out
        if checkpoints and i % checkpoints == 0:
            out.append((i * h, c))
    return c, t, out


def _integrate(spec, u0, t, nonlinear, checkpoints=0):
    c0 = u0.resized(state_size(spec, u0)).coeffs
    dt = spec.dt
    reached = 0.0
    for _ in range(spec.max_halvings + 1):
        c, reached, out = _attempt(spec, c0, t, dt, nonlinear, checkpoints)
        if c is not None:
            return FourierField(c), dt, out
        dt /= 2
    raise FlowError("L2 drift above tolerance at the smallest step", reached)


def evolve(spec: FlowSpec, u0: FourierField, t: float, nonlinear: bool = True) -> FourierField:
    """Phi^N_t(u0); ``nonlinear=False`` runs the linear flow only (test hook)."""
    return _integrate(spec, u0, t, nonlinear)[0]


def trajectory(spec: FlowSpec, u0: FourierField, t_final: float, stride: int
               ) -> Iterator[tuple]:
    """Checkpoints (t, field) every ``stride`` accepted steps, t=0 first."""
    yield 0.0, u0.resized(state_size(spec, u0))
    _, _, out = _integrate(spec, u0, t_final, True, checkpoints=stride)
    for t, c in out:
        yield t, FourierField(c)


def write_trajectory_csv(path, checkpoints) -> None:
    """Long format: t, n, re, im (one row per positive mode)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "n", "re", "im"])
        for t, field in checkpoints:
            for n, c in enumerate(np.ravel(field.coeffs), start=1):
                w.writerow([f"{t:.12g}", n, repr(float(c.real)), repr(float(c.imag))])


def l2_drift(spec: FlowSpec, u0: FourierField, t: float) -> float:
    """Relative change of ||P_N u||^2 over [0, t]."""
    u = evolve(spec, u0, t)
    a = _l2(u.coeffs[..., : spec.N])
    b = _l2(u0.resized(spec.N).coeffs)
    return float(np.max(np.abs(a - b) / np.where(b > 0, b, 1.0)))


def convergence_probe(u0: FourierField, n_list, t: float, s: float,
                      dt: float = 1e-3, tol: float = 1e-10) -> list:
    """Rows (N, ||Phi_t^{N_ref}(u0) - Phi_t^N(u0)||_{H^s}) with N_ref = max(n_list)."""
    n_list = sorted(n_list)
    if len(n_list) < 2:
        raise ValueError("need a reference N and at least one N to compare")
    n_ref = n_list[-1]
    if any(4 * n > n_ref for n in n_list[:-1]):
        raise ValueError("reference N must be at least 4x every other N")
    u0 = u0.resized(max(u0.n_max, n_ref))
    ref = evolve(FlowSpec("BO", n_ref, dt, tol), u0, t)
    rows = []
    for n in n_list[:-1]:
        un = evolve(FlowSpec("BO", n, dt, tol), u0, t)
        rows.append((n, float(np.sqrt(np.max(sobolev_norm_sq(ref - un, s))))))
    return rows
