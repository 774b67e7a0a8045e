"""Zero-mean real trigonometric polynomials on the 2*pi-periodic circle.

A field is stored through its positive Fourier modes c_1..c_n only; the
negative modes are the complex conjugates and the mean is always zero.
Leading array axes, when present, are batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierField:
    """Real field u(x) = sum_{0<|j|<=n_max} c_j e^{ijx} with c_{-j} = conj(c_j)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        c = c.astype(complex_dtype(c))
        if c.ndim == 0 or c.shape[-1] < 1:
            raise ValueError("a field needs at least one positive mode")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    @classmethod
    def zeros(cls, n_max: int) -> "FourierField":
        return cls(np.zeros(n_max, dtype=complex))

    @classmethod
    def from_modes(cls, modes: dict, n_max: int | None = None) -> "FourierField":
        """Build from ``{j: c_j}`` with j >= 1."""
        top = max(modes) if modes else 1
        c = np.zeros(n_max or top, dtype=complex)
        for j, value in modes.items():
            if j < 1:
                raise ValueError("only positive modes are stored")
            c[j - 1] = value
        return cls(c)

    def mode(self, j: int):
        """Coefficient c_j for any integer j (zero outside the support)."""
        if j == 0 or abs(j) > self.n_max:
            return np.zeros(self.batch_shape, dtype=complex)[()]
        c = self.coeffs[..., abs(j) - 1]
        return c if j > 0 else np.conj(c)

    def __getitem__(self, index) -> "FourierField":
        return FourierField(self.coeffs[index])

    def __add__(self, other: "FourierField") -> "FourierField":
        a, b = _common_length(self.coeffs, other.coeffs)
        return FourierField(a + b)

    def __sub__(self, other: "FourierField") -> "FourierField":
        a, b = _common_length(self.coeffs, other.coeffs)
        return FourierField(a - b)

    def __neg__(self) -> "FourierField":
        return FourierField(-self.coeffs)

    def __mul__(self, scalar) -> "FourierField":
        if isinstance(scalar, FourierField):
            return NotImplemented
        return FourierField(np.asarray(scalar)[..., None] * self.coeffs)

    __rmul__ = __mul__

    def resized(self, n_max: int) -> "FourierField":
        """Zero-pad or truncate to ``n_max`` positive modes."""
        c = self.coeffs[..., :n_max]
        if n_max > self.n_max:
            pad = [(0, 0)] * (c.ndim - 1) + [(0, n_max - self.n_max)]
            c = np.pad(c, pad)
        return FourierField(c)

    def two_sided(self) -> np.ndarray:
        """Coefficients for modes -n..n (index j + n), mode 0 set to zero."""
        return two_sided(self.coeffs)

    def __call__(self, x) -> np.ndarray:
        """Point evaluation; real by construction."""
        x = np.asarray(x, dtype=float)
        j = np.arange(1, self.n_max + 1)
        phases = np.exp(1j * np.multiply.outer(x, j))
        # result shape: batch_shape + x.shape
        return 2.0 * np.real(np.tensordot(self.coeffs, phases, axes=([-1], [-1])))


def complex_dtype(a) -> np.dtype:
    """complex128, or the extended complex type for long double input."""
    kind = np.asarray(a).dtype
    return np.dtype(np.clongdouble) if kind in (np.longdouble, np.clongdouble) else np.dtype(complex)


def extended(u: "FourierField") -> "FourierField":
    """Copy of ``u`` carried in long double precision."""
    return FourierField(u.coeffs.astype(np.clongdouble))


def _common_length(a, b):
    n = max(a.shape[-1], b.shape[-1])
    return (np.pad(a, [(0, 0)] * (a.ndim - 1) + [(0, n - a.shape[-1])]),
            np.pad(b, [(0, 0)] * (b.ndim - 1) + [(0, n - b.shape[-1])]))


def two_sided(pos: np.ndarray, mean=0.0) -> np.ndarray:
    """Hermitian extension of positive-mode coefficients to modes -n..n."""
    pos = np.asarray(pos)
    pos = pos.astype(complex_dtype(pos))
    zero = np.broadcast_to(np.asarray(mean, dtype=pos.dtype), pos.shape[:-1])[..., None]
    return np.concatenate([np.conj(pos[..., ::-1]), zero, pos], axis=-1)


def positive_part(u: FourierField) -> np.ndarray:
    """Two-sided spectrum of u^+, the projection on modes j > 0."""
    out = u.two_sided()
    out[..., : u.n_max + 1] = 0.0
    return out


def negative_part(u: FourierField) -> np.ndarray:
    """Two-sided spectrum of u^-, the projection on modes j < 0."""
    out = u.two_sided()
    out[..., u.n_max:] = 0.0
    return out


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier acting mode-wise.

    ``kind`` is one of ``derivative`` (symbol (ij)^order), ``hilbert``
    (symbol -i sign(j)), ``dirichlet_low`` (|j| <= order) and
    ``dirichlet_high`` (|j| > order).
    """

    kind: str
    order: int = 0

    KINDS = ("derivative", "hilbert", "dirichlet_low", "dirichlet_high")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.order < 0:
            raise ValueError("order must be non-negative")

    @classmethod
    def derivative(cls, alpha: int) -> "Multiplier":
        return cls("derivative", alpha)

    @classmethod
    def hilbert(cls) -> "Multiplier":
        return cls("hilbert")

    @classmethod
    def low(cls, n: int) -> "Multiplier":
        return cls("dirichlet_low", n)

    @classmethod
    def high(cls, n: int) -> "Multiplier":
        return cls("dirichlet_high", n)

    def symbol(self, j) -> np.ndarray:
        j = np.asarray(j)
        if self.kind == "derivative":
            # i^order * j^order, exact for integer j
            unit = (1, 1j, -1, -1j)[self.order % 4]
            return unit * j.astype(float) ** self.order
        if self.kind == "hilbert":
            return -1j * np.sign(j)
        if self.kind == "dirichlet_low":
            return (np.abs(j) <= self.order).astype(complex)
        return (np.abs(j) > self.order).astype(complex)

    def __str__(self):
        if self.kind == "derivative":
            return f"D{self.order}"
        if self.kind == "hilbert":
            return "H"
        return ("P<=" if self.kind == "dirichlet_low" else "P>") + str(self.order)


def apply_multiplier(m: Multiplier, u: FourierField) -> FourierField:
    c = u.coeffs
    if m.kind == "dirichlet_low" and m.order < u.n_max:
        c = c[..., : max(m.order, 1)]
        if m.order == 0:
            return FourierField(np.zeros_like(c))
    j = np.arange(1, c.shape[-1] + 1)
    return FourierField(c * m.symbol(j))


def derivative(u: FourierField, alpha: int = 1) -> FourierField:
    return apply_multiplier(Multiplier.derivative(alpha), u)


def hilbert(u: FourierField) -> FourierField:
    return apply_multiplier(Multiplier.hilbert(), u)


def project_low(u: FourierField, n: int) -> FourierField:
    return apply_multiplier(Multiplier.low(n), u)


def project_high(u: FourierField, n: int) -> FourierField:
    return apply_multiplier(Multiplier.high(n), u)


class ProductResult(NamedTuple):
    """Zero-mean part of a product plus its retained mode-0 coefficient."""

    field: FourierField
    mean: np.ndarray | float


def fft_size(n: int) -> int:
    """Smallest 2^a 3^b 5^c >= n."""
    best = 1 << max(int(n - 1).bit_length(), 0)
    p5 = 1
    while p5 < best:
        p35 = p5
        while p35 < best:
            size = p35
            while size < n:
                size *= 2
            best = min(best, size)
            p35 *= 3
        p5 *= 5
    return max(best, 1)


def to_grid(spectrum: np.ndarray, size: int) -> np.ndarray:
    """Samples on ``size`` equispaced points of a two-sided spectrum."""
    d = (spectrum.shape[-1] - 1) // 2
    if size < 2 * d + 1:
        raise ValueError("grid too small for the spectrum")
    buf = np.zeros(spectrum.shape[:-1] + (size,), dtype=complex_dtype(spectrum))
    buf[..., : d + 1] = spectrum[..., d:]
    if d:
        buf[..., size - d:] = spectrum[..., :d]
    return np.fft.ifft(buf, axis=-1) * size


def from_grid(values: np.ndarray, degree: int) -> np.ndarray:
    """Two-sided spectrum (modes -degree..degree) of grid samples.

    Exact when the sampled polynomial has degree <= ``degree`` and the grid
    has more than 2*degree points.
    """
    size = values.shape[-1]
    if size < 2 * degree + 1:
        raise ValueError("grid too small to resolve the spectrum")
    spec = np.fft.fft(values, axis=-1) / size
    return np.concatenate([spec[..., size - degree:], spec[..., : degree + 1]], axis=-1)


def product(u: FourierField, v: FourierField) -> ProductResult:
    """Exact product; the returned field has n_max = u.n_max + v.n_max."""
    a, b = u.n_max, v.n_max
    n = a + b
    size = fft_size(2 * n + 1)
    vals = to_grid(u.two_sided(), size) * to_grid(v.two_sided(), size)
    spec = from_grid(vals, n)
    return ProductResult(FourierField(spec[..., n + 1:]), spec[..., n].real[()])


def integrate(u, mean=0.0):
    """Integral over [0, 2*pi): 2*pi times the mode-0 coefficient.

    Accepts a ``FourierField`` (plus an optional retained ``mean``) or a
    ``ProductResult``.
    """
    if isinstance(u, ProductResult):
        mean = u.mean
        u = u.field
    return TWO_PI * np.broadcast_to(np.real(np.asarray(mean)), u.batch_shape)[()]


def inner(u: FourierField, v: FourierField):
    """Integral of u*v via Parseval: 2*pi * sum_{j != 0} c_j(u) conj(c_j(v))."""
    a, b = _common_length(u.coeffs, v.coeffs)
    return 2.0 * TWO_PI * np.real(np.sum(a * np.conj(b), axis=-1))


def sobolev_norm_sq(u: FourierField, s: float):
    """sum_{0<|j|<=n} |j|^{2s} |c_j|^2, without the 2*pi factor."""
    j = np.arange(1, u.n_max + 1, dtype=float)
    return 2.0 * np.sum(j ** (2.0 * s) * np.abs(u.coeffs) ** 2, axis=-1)


def sobolev_inner(u: FourierField, v: FourierField, s: float):
    """Real bilinear form whose diagonal is ``sobolev_norm_sq``."""
    a, b = _common_length(u.coeffs, v.coeffs)
    j = np.arange(1, a.shape[-1] + 1, dtype=float)
    return 2.0 * np.real(np.sum(j ** (2.0 * s) * a * np.conj(b), axis=-1))


def random_field(n_max: int, rng: np.random.Generator, size=None) -> FourierField:
    """Coefficients drawn uniformly from the complex unit disk."""
    shape = (n_max,) if size is None else tuple(np.atleast_1d(size)) + (n_max,)
    r = np.sqrt(rng.uniform(size=shape))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    return FourierField(r * np.exp(1j * theta))
