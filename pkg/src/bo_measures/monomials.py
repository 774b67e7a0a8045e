"""Monomials in u, its derivatives and Hilbert transforms, evaluated exactly.

Trees are built from three node types:

* ``Leaf(alpha, field)`` -- the derivative d^alpha of a named field;
* ``Apply(op, child)``   -- a Fourier multiplier applied to a subtree
  (``H(x)`` is the Hilbert wrap of the grammar);
* ``Product(factors)``   -- pointwise product.

Integrals are computed on an equispaced grid sized from the trigonometric
degrees of the subtrees, so that every spectral operation and the final
mean are free of aliasing.  Results agree with exact convolution up to
floating-point rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Union

import numpy as np

from .fourier import (
    TWO_PI,
    FourierField,
    Multiplier,
    complex_dtype,
    fft_size,
    from_grid,
    negative_part,
    positive_part,
    project_low,
    to_grid,
)

HILBERT = Multiplier.hilbert()


@dataclass(frozen=True)
class Leaf:
    alpha: int = 0
    field: str = "u"

    def __str__(self):
        return format_monomial(self)


@dataclass(frozen=True)
class Apply:
    op: Multiplier
    child: "Node"

    def __str__(self):
        return format_monomial(self)


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a product needs at least one factor")

    def __str__(self):
        return format_monomial(self)


Node = Union[Leaf, Apply, Product]


def H(node: Node) -> Apply:
    return Apply(HILBERT, node)


def D(alpha: int, node: Node) -> Node:
    if isinstance(node, Leaf):
        return Leaf(node.alpha + alpha, node.field)
    return Apply(Multiplier.derivative(alpha), node)


def high(n: int, node: Node) -> Apply:
    return Apply(Multiplier.high(n), node)


def prod(*factors: Node) -> Product:
    return Product(factors)


def u_(alpha: int = 0, field: str = "u") -> Leaf:
    return Leaf(alpha, field)


# -- structure -----------------------------------------------------------


def leaves(node: Node) -> list:
    """Leaves in depth-first, left-to-right order."""
    if isinstance(node, Leaf):
        return [node]
    if isinstance(node, Apply):
        return leaves(node.child)
    return [leaf for f in node.factors for leaf in leaves(f)]


def degree(node: Node) -> int:
    """Number of leaves, i.e. the n with p in P_n."""
    return len(leaves(node))


def max_order(node: Node) -> int:
    """|p|: the largest derivative order over the leaves."""
    return max(leaf.alpha for leaf in leaves(node))


def total_order(node: Node) -> int:
    """||p||: the sum of derivative orders over the leaves."""
    return sum(leaf.alpha for leaf in leaves(node))


def skeleton(node: Node) -> Product:
    """The monomial with every Hilbert transform erased, as a flat product."""
    return Product(tuple(sorted(leaves(node), key=lambda l: (l.field, l.alpha))))


def replace_leaf(node: Node, index: int, new) -> Node:
    """Replace the ``index``-th leaf by ``new(leaf)``."""
    counter = [0]

    def walk(n):
        if isinstance(n, Leaf):
            i = counter[0]
            counter[0] += 1
            return new(n) if i == index else n
        if isinstance(n, Apply):
            return Apply(n.op, walk(n.child))
        return Product(tuple(walk(f) for f in n.factors))

    out = walk(node)
    if index >= counter[0]:
        raise IndexError("leaf index out of range")
    return out


# -- evaluation ----------------------------------------------------------


def _spectrum(f) -> np.ndarray:
    if isinstance(f, FourierField):
        return f.two_sided()
    arr = np.asarray(f)
    arr = arr.astype(complex_dtype(arr))
    if arr.shape[-1] % 2 == 0:
        raise ValueError("two-sided spectra have odd length")
    return arr


def _trig_degree(node: Node, degs: dict) -> int:
    if isinstance(node, Leaf):
        return degs[node.field]
    if isinstance(node, Apply):
        d = _trig_degree(node.child, degs)
        return min(d, node.op.order) if node.op.kind == "dirichlet_low" else d
    return sum(_trig_degree(f, degs) for f in node.factors)


def _grid_need(node: Node, degs: dict) -> int:
    """Grid size so that every spectrum inside ``node`` is resolved."""
    if isinstance(node, Leaf):
        return 2 * degs[node.field] + 1
    if isinstance(node, Apply):
        return max(2 * _trig_degree(node.child, degs) + 1, _grid_need(node.child, degs))
    return max(_grid_need(f, degs) for f in node.factors)


class Evaluator:
    """Grid evaluation of expression trees with memoised subtrees.

    ``fields`` maps names to ``FourierField`` objects or two-sided complex
    spectra (modes -d..d).  All roots evaluated by one instance share the
    grid and the cache.
    """

    def __init__(self, fields: dict, roots):
        self.spectra = {name: _spectrum(f) for name, f in fields.items()}
        self.degs = {name: (s.shape[-1] - 1) // 2 for name, s in self.spectra.items()}
        need = 1
        for root in roots:
            need = max(need, _grid_need(root, self.degs), _trig_degree(root, self.degs) + 1)
        self.size = fft_size(need)
        self.cache: dict = {}

    def spectrum(self, node: Node) -> np.ndarray:
        if isinstance(node, Leaf):
            s = self.spectra[node.field]
            if node.alpha:
                d = self.degs[node.field]
                s = s * Multiplier.derivative(node.alpha).symbol(np.arange(-d, d + 1))
            return s
        if isinstance(node, Apply):
            s = self.spectrum(node.child)
            d = (s.shape[-1] - 1) // 2
            return s * node.op.symbol(np.arange(-d, d + 1))
        return from_grid(self.grid(node), _trig_degree(node, self.degs))

    def grid(self, node: Node) -> np.ndarray:
        hit = self.cache.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Product):
            out = self.grid(node.factors[0])
            for f in node.factors[1:]:
                out = out * self.grid(f)
        else:
            out = to_grid(self.spectrum(node), self.size)
        self.cache[node] = out
        return out

    def integral(self, node: Node) -> np.ndarray:
        return TWO_PI * np.mean(self.grid(node), axis=-1)

    def abs_integral(self, node: Node) -> np.ndarray:
        """Grid estimate of the integral of |integrand|; used as a scale."""
        return TWO_PI * np.mean(np.abs(self.grid(node)), axis=-1)


def _real(value, tol=1e-9):
    value = np.asarray(value)
    return np.real(value)[()]


def integral(node: Node, fields: dict):
    """Complex integral of ``node`` over [0, 2*pi) for arbitrary spectra."""
    return Evaluator(fields, [node]).integral(node)[()]


def eval_integral(p: Node, u: FourierField):
    """Integral of p(u) for a real field u."""
    return _real(integral(p, {"u": u}))


@dataclass(frozen=True)
class WeightedMonomialSum:
    """Linear combination sum_m c_m * integral(p_m)."""

    terms: tuple  # of (coefficient, Node)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), p) for c, p in self.terms))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def evaluate(self, u: FourierField):
        if not self.terms:
            return np.zeros(u.batch_shape)[()]
        ev = Evaluator({"u": u}, [p for _, p in self.terms])
        return _real(sum(c * ev.integral(p) for c, p in self.terms))

    def with_coefficients(self, coeffs) -> "WeightedMonomialSum":
        return WeightedMonomialSum(tuple(zip(coeffs, (p for _, p in self.terms))))


# -- p*_N and Gateaux derivatives -----------------------------------------


def _substituted_leaf(n: int):
    def sub(leaf: Leaf) -> Node:
        inner = high(n, Product((Leaf(0, leaf.field), Leaf(1, leaf.field))))
        return Apply(Multiplier.derivative(leaf.alpha), inner) if leaf.alpha else inner

    return sub


@dataclass(frozen=True)
class PStar:
    """p*_N: one summand per leaf, that leaf replaced by d^a P_{>N}(u u_x)."""

    monomial: Node
    n: int
    summands: tuple

    def __len__(self):
        return len(self.summands)

    def evaluate(self, u: FourierField):
        ev = Evaluator({"u": u}, self.summands)
        return _real(sum(ev.integral(s) for s in self.summands))

    def evaluate_summands(self, u: FourierField) -> list:
        ev = Evaluator({"u": u}, self.summands)
        return [_real(ev.integral(s)) for s in self.summands]


def pstar_N(p: Node, n: int) -> PStar:
    k = degree(p)
    if k < 1:
        raise ValueError("monomial has no leaves")
    sub = _substituted_leaf(n)
    return PStar(p, n, tuple(replace_leaf(p, i, sub) for i in range(k)))


def derivative_terms(p: Node, direction: str = "v") -> list:
    """The leafwise substitutions whose sum is the Gateaux derivative."""
    return [replace_leaf(p, i, lambda l: Leaf(l.alpha, direction)) for i in range(degree(p))]


def directional_derivative(p: Node, u: FourierField, v: FourierField):
    """d/de integral p(u + e v) at e = 0, computed exactly leaf by leaf."""
    terms = derivative_terms(p)
    ev = Evaluator({"u": u, "v": v}, terms)
    return _real(sum(ev.integral(t) for t in terms))


def sum_directional_derivative(wsum: WeightedMonomialSum, u: FourierField, v: FourierField,
                               per_term: bool = False):
    """Gateaux derivative of every term of ``wsum`` with one shared grid."""
    expanded = [(c, derivative_terms(p)) for c, p in wsum]
    ev = Evaluator({"u": u, "v": v}, [t for _, ts in expanded for t in ts])
    values = [_real(sum(ev.integral(t) for t in ts)) for _, ts in expanded]
    if per_term:
        return values
    return sum(c * val for (c, _), val in zip(expanded, values))


# -- exact identities ------------------------------------------------------


class IntparResiduals(NamedTuple):
    """Relative residuals of the two integration-by-parts identities."""

    mire1: float
    mire3: float


def _relative(value, scale):
    value = float(np.max(np.abs(value)))
    scale = float(np.max(scale))
    return value / scale if scale > 0 else value


def _check_support(u: FourierField, n: int):
    if u.n_max > n and np.any(u.coeffs[..., n:] != 0):
        raise ValueError(f"field has modes above N={n}; project it first")


def check_intpar_identities(u: FourierField, m: int, n: int) -> IntparResiduals:
    """Residuals of two identities valid for u supported on |j| <= N.

    mire1: int u (H d^m u) d^m H P_{>N}(u u_x) = int u d^m u d^m P_{>N}(u u_x)
    mire3: int u d^m u d^m H P_{>N}(u u_x) + int u d^m P_{>N}(u u_x) H d^m u = 0
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    _check_support(u, n)
    sub = parse_monomial(f"D{m}(P>{n}(u*u_x))")
    um, hum = Leaf(m), H(Leaf(m))
    lhs1 = Product((Leaf(0), hum, H(sub)))
    rhs1 = Product((Leaf(0), um, sub))
    t1 = Product((Leaf(0), um, H(sub)))
    t2 = Product((Leaf(0), sub, hum))
    ev = Evaluator({"u": u}, [lhs1, rhs1, t1, t2])
    r1 = _relative(ev.integral(lhs1) - ev.integral(rhs1),
                   np.maximum(ev.abs_integral(lhs1), ev.abs_integral(rhs1)))
    r3 = _relative(ev.integral(t1) + ev.integral(t2),
                   np.maximum(ev.abs_integral(t1), ev.abs_integral(t2)))
    return IntparResiduals(r1, r3)


# Terms evaluated at u_N = P_N u; "up"/"um" are the positive/negative-mode
# parts of u_N.  Each entry: list of (coefficient, expression template).
VANISHING_TERMS = {
    # k = 2, d/dt E_1 split: first and second pieces
    "hebSR_I": [("3/2", "u*P>{N}(u*u_x)*H(u_x)")],
    "hebSR_II": [("3/4", "u^2*H(D1(P>{N}(u*u_x)))")],
    # k = 4, p = u u_xx H u_x: third piece of p*_N
    "esrty_III": [("1", "u*H(u_x)*D2(P>{N}(u*u_x))")],
    # second piece of p*_N: its u u_xx H(u u_xx) part and the +/- pair it splits into
    "esrty_II_first": [("1", "u*u_xx*H(P>{N}(u*u_xx))")],
    "esrty_II_pair": [
        ("1", "P>{N}(up*up_xx)*H(P>{N}(um*um_xx))"),
        ("1", "P>{N}(um*um_xx)*H(P>{N}(up*up_xx))"),
    ],
}


def vanishing_term_expressions(which: str, n: int) -> list:
    try:
        spec = VANISHING_TERMS[which]
    except KeyError:
        raise KeyError(f"unknown term id {which!r}; known: {sorted(VANISHING_TERMS)}") from None
    return [(float(Fraction(c)), parse_monomial(t.format(N=n))) for c, t in spec]


def check_vanishing_terms(u: FourierField, n: int, which: str, coefficients=None) -> float:
    """Relative size of a term that vanishes identically on P_N u.

    ``coefficients`` overrides the stored ones (used to check that the
    residual notices a wrong coefficient).
    """
    terms = vanishing_term_expressions(which, n)
    if coefficients is not None:
        if len(coefficients) != len(terms):
            raise ValueError(f"{which} has {len(terms)} terms")
        terms = [(float(c), t) for c, (_, t) in zip(coefficients, terms)]
    un = project_low(u, n) if u.n_max > n else u
    fields = {"u": un, "up": positive_part(un), "um": negative_part(un)}
    ev = Evaluator(fields, [t for _, t in terms])
    total = sum(c * ev.integral(t) for c, t in terms)
    scale = sum(abs(c) * ev.abs_integral(t) for c, t in terms)
    return _relative(total, scale)


# -- text form -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(P>|P<=|H|D)(\d*)\(|([A-Za-z]+)(?:_(x+|d\d+))?|(\d+)|(.))")


def _tokens(text: str) -> Iterator[tuple]:
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at {pos}")
        pos = m.end()
        op, order, name, suffix, number, punct = m.groups()
        if op:
            yield ("op", op, order)
        elif name:
            if suffix is None:
                alpha = 0
            elif suffix.startswith("d"):
                alpha = int(suffix[1:])
            else:
                alpha = len(suffix)
            yield ("leaf", name, alpha)
        elif number:
            yield ("int", int(number), None)
        elif punct.strip():
            yield ("punct", punct, None)


class _Parser:
    def __init__(self, text):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ValueError(f"unexpected token {tok}")
        self.i += 1
        return tok

    def expr(self) -> Node:
        factors = self.factor()
        while self.peek()[:2] == ("punct", "*"):
            self.take()
            factors += self.factor()
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> list:
        node = self.atom()
        if self.peek()[:2] == ("punct", "^"):
            self.take()
            return [node] * self.take("int")[1]
        return [node]

    def atom(self) -> Node:
        kind, a, b = self.take()
        if kind == "leaf":
            return Leaf(b, a)
        if kind == "op":
            inner = self.expr()
            self.take("punct", ")")
            if a == "H":
                return H(inner)
            if a == "D":
                return Apply(Multiplier.derivative(int(b)), inner)
            mult = Multiplier.high(int(b)) if a == "P>" else Multiplier.low(int(b))
            return Apply(mult, inner)
        if (kind, a) == ("punct", "("):
            inner = self.expr()
            self.take("punct", ")")
            return inner if isinstance(inner, Product) else Product((inner,))
        raise ValueError(f"unexpected token {(kind, a)}")


def parse_monomial(text: str) -> Node:
    """Parse e.g. ``"u^2*H(u_x)"`` or ``"u*H(u_x)*H(u*u_x)"``.

    Leaves are ``name``, ``name_x``, ``name_xx``, ... or ``name_d5``;
    operators are ``H(...)``, ``D<k>(...)``, ``P>N(...)`` and ``P<=N(...)``.
    """
    p = _Parser(text)
    node = p.expr()
    if p.i != len(p.toks):
        raise ValueError(f"trailing input in {text!r}")
    return node


def _fmt_leaf(leaf: Leaf) -> str:
    if leaf.alpha == 0:
        return leaf.field
    if leaf.alpha <= 3:
        return f"{leaf.field}_{'x' * leaf.alpha}"
    return f"{leaf.field}_d{leaf.alpha}"


def format_monomial(node: Node, nested: bool = False) -> str:
    if isinstance(node, Leaf):
        return _fmt_leaf(node)
    if isinstance(node, Apply):
        op = node.op
        head = {"hilbert": "H", "derivative": f"D{op.order}",
                "dirichlet_high": f"P>{op.order}", "dirichlet_low": f"P<={op.order}"}[op.kind]
        return f"{head}({format_monomial(node.child)})"
    parts, i = [], 0
    fs = node.factors
    while i < len(fs):
        j = i
        while j + 1 < len(fs) and fs[j + 1] == fs[i]:
            j += 1
        text = format_monomial(fs[i], nested=True)
        parts.append(text if j == i else f"{text}^{j - i + 1}")
        i = j + 1
    body = "*".join(parts)
    return f"({body})" if nested or len(fs) == 1 else body
