"""Expression-tree nodes backing :class:`lipstokes.fields.ScalarField`.

Every node evaluates vectorised over a batch of points ``X`` of shape
``(N, n)`` and returns values of shape ``(N,)``.  ``value_grad`` returns the
value together with the almost-everywhere gradient, shape ``(N, n)``.

Kink convention: at points where a nonsmooth primitive switches branch the
right-continuous branch is used, e.g. ``sign(0) = +1`` for ``abs``.

Each node also reports its *switching functions*: subtrees whose zero sets
contain every point where the node fails to be polynomial.  The quadrature
layer splits integration intervals at those zero sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import integrate_boxes

FD_MIN_STEP = 1e-6


def fd_step(x: np.ndarray) -> np.ndarray:
    """Central-difference step ``max(1e-6, 1e-8 (1 + |x|))``."""
    return np.maximum(FD_MIN_STEP, 1e-8 * (1.0 + np.abs(x)))


def _fmt(v: float) -> str:
    if v == math.pi:
        return "pi"
    if v == -math.pi:
        return "(-pi)"
    s = repr(float(v))
    return f"({s})" if v < 0 else s


class Node:
    """Abstract expression node."""

    def value(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value_grad(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.value(X), fd_gradient(self, X)

    def children(self) -> tuple[Node, ...]:
        return ()

    def own_switches(self) -> tuple[Node, ...]:
        return ()

    def switches(self) -> tuple[Node, ...]:
        out: dict[Node, None] = {}
        for s in self.own_switches():
            out[s] = None
        for c in self.children():
            for s in c.switches():
                out[s] = None
        return tuple(out)

    def coords(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for c in self.children():
            out |= c.coords()
        return out

    def substitute(self, mapping: tuple[Node, ...]) -> Node:
        """Replace coordinate ``x_i`` by ``mapping[i]`` throughout."""
        raise NotImplementedError

    def bounds(self, lo: np.ndarray, hi: np.ndarray):
        """Enclosure of the node's range over the box ``[lo, hi]``.

        ``lo`` and ``hi`` have shape ``(..., n)``; the result is a pair of
        arrays (or scalars) broadcastable to the batch shape ``(...)``.
        """
        return -math.inf, math.inf

    def render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


def fd_gradient(node: Node, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    G = np.empty_like(X)
    for j in range(X.shape[1]):
        h = fd_step(X[:, j])
        Xp = X.copy()
        Xm = X.copy()
        Xp[:, j] += h
        Xm[:, j] -= h
        G[:, j] = (node.value(Xp) - node.value(Xm)) / (Xp[:, j] - Xm[:, j])
    return G


def _zeros_like_grad(X: np.ndarray) -> np.ndarray:
    return np.zeros(X.shape, dtype=float)


# --------------------------------------------------------------------- leaves


@dataclass(frozen=True)
class Const(Node):
    c: float

    def value(self, X):
        return np.full(X.shape[0], self.c, dtype=float)

    def value_grad(self, X):
        return self.value(X), _zeros_like_grad(X)

    def substitute(self, mapping):
        return self

    def bounds(self, lo, hi):
        return self.c, self.c

    def render(self):
        return _fmt(self.c)


@dataclass(frozen=True)
class Coord(Node):
    index: int

    def value(self, X):
        return X[:, self.index].astype(float, copy=True)

    def value_grad(self, X):
        G = _zeros_like_grad(X)
        G[:, self.index] = 1.0
        return self.value(X), G

    def coords(self):
        return frozenset((self.index,))

    def substitute(self, mapping):
        return mapping[self.index]

    def bounds(self, lo, hi):
        return lo[..., self.index], hi[..., self.index]

    def render(self):
        return f"x{self.index + 1}"


# ----------------------------------------------------------------- arithmetic


@dataclass(frozen=True)
class Add(Node):
    a: Node
    b: Node

    def value(self, X):
        return self.a.value(X) + self.b.value(X)

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        return va + vb, ga + gb

    def children(self):
        return (self.a, self.b)

    def substitute(self, mapping):
        return add(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        b0, b1 = self.b.bounds(lo, hi)
        return a0 + b0, a1 + b1

    def render(self):
        return f"({self.a.render()} + {self.b.render()})"


@dataclass(frozen=True)
class Sub(Node):
    a: Node
    b: Node

    def value(self, X):
        return self.a.value(X) - self.b.value(X)

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        return va - vb, ga - gb

    def children(self):
        return (self.a, self.b)

    def substitute(self, mapping):
        return sub(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        b0, b1 = self.b.bounds(lo, hi)
        return a0 - b1, a1 - b0

    def render(self):
        return f"({self.a.render()} - {self.b.render()})"


@dataclass(frozen=True)
class Neg(Node):
    a: Node

    def value(self, X):
        return -self.a.value(X)

    def value_grad(self, X):
        v, g = self.a.value_grad(X)
        return -v, -g

    def children(self):
        return (self.a,)

    def substitute(self, mapping):
        return neg(self.a.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        return -a1, -a0

    def render(self):
        return f"(-{self.a.render()})"


def _mul_bounds(a0, a1, b0, b1):
    with np.errstate(invalid="ignore"):
        P = np.stack(np.broadcast_arrays(a0 * b0, a0 * b1, a1 * b0, a1 * b1))
    nan = np.isnan(P)
    low = np.where(nan, np.inf, P).min(axis=0)
    high = np.where(nan, -np.inf, P).max(axis=0)
    empty = nan.all(axis=0)
    return np.where(empty, -np.inf, low), np.where(empty, np.inf, high)


@dataclass(frozen=True)
class Mul(Node):
    a: Node
    b: Node

    def value(self, X):
        return self.a.value(X) * self.b.value(X)

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        return va * vb, ga * vb[:, None] + va[:, None] * gb

    def children(self):
        return (self.a, self.b)

    def substitute(self, mapping):
        return mul(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        return _mul_bounds(*self.a.bounds(lo, hi), *self.b.bounds(lo, hi))

    def render(self):
        return f"({self.a.render()} * {self.b.render()})"


@dataclass(frozen=True)
class Div(Node):
    a: Node
    b: Node

    def value(self, X):
        return self.a.value(X) / self.b.value(X)

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        return va / vb, (ga * vb[:, None] - va[:, None] * gb) / (vb * vb)[:, None]

    def children(self):
        return (self.a, self.b)

    def substitute(self, mapping):
        return div(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        b0, b1 = self.b.bounds(lo, hi)
        straddle = (b0 <= 0.0) & (b1 >= 0.0)
        with np.errstate(divide="ignore"):
            r0, r1 = _mul_bounds(*self.a.bounds(lo, hi), 1.0 / b1, 1.0 / b0)
        return np.where(straddle, -np.inf, r0), np.where(straddle, np.inf, r1)

    def render(self):
        return f"({self.a.render()} / {self.b.render()})"


@dataclass(frozen=True)
class Pow(Node):
    a: Node
    k: int

    def value(self, X):
        return self.a.value(X) ** self.k

    def value_grad(self, X):
        v, g = self.a.value_grad(X)
        if self.k == 0:
            return np.ones_like(v), np.zeros_like(g)
        return v**self.k, (self.k * v ** (self.k - 1))[:, None] * g

    def children(self):
        return (self.a,)

    def substitute(self, mapping):
        return Pow(self.a.substitute(mapping), self.k)

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        c0, c1 = a0**self.k, a1**self.k
        low = np.minimum(c0, c1)
        if self.k % 2 == 0:
            low = np.where((a0 <= 0.0) & (a1 >= 0.0), 0.0, low)
        return low, np.maximum(c0, c1)

    def render(self):
        return f"({self.a.render()}^{self.k})"


# ------------------------------------------------------------ kinked pieces


@dataclass(frozen=True)
class Abs(Node):
    a: Node

    def value(self, X):
        return np.abs(self.a.value(X))

    def value_grad(self, X):
        v, g = self.a.value_grad(X)
        sgn = np.where(v >= 0.0, 1.0, -1.0)
        return np.abs(v), sgn[:, None] * g

    def children(self):
        return (self.a,)

    def own_switches(self):
        return (self.a,)

    def substitute(self, mapping):
        return Abs(self.a.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        low = np.where(a0 >= 0, a0, np.where(a1 <= 0, -a1, 0.0))
        return low, np.maximum(-a0, a1)

    def render(self):
        return f"abs({self.a.render()})"


@dataclass(frozen=True)
class Max(Node):
    a: Node
    b: Node

    def value(self, X):
        return np.maximum(self.a.value(X), self.b.value(X))

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        pick_a = va >= vb
        return np.where(pick_a, va, vb), np.where(pick_a[:, None], ga, gb)

    def children(self):
        return (self.a, self.b)

    def own_switches(self):
        return (sub(self.a, self.b),)

    def substitute(self, mapping):
        return Max(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        b0, b1 = self.b.bounds(lo, hi)
        return np.maximum(a0, b0), np.maximum(a1, b1)

    def render(self):
        return f"max({self.a.render()}, {self.b.render()})"


@dataclass(frozen=True)
class Min(Node):
    a: Node
    b: Node

    def value(self, X):
        return np.minimum(self.a.value(X), self.b.value(X))

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        pick_a = va < vb
        return np.where(pick_a, va, vb), np.where(pick_a[:, None], ga, gb)

    def children(self):
        return (self.a, self.b)

    def own_switches(self):
        return (sub(self.a, self.b),)

    def substitute(self, mapping):
        return Min(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        b0, b1 = self.b.bounds(lo, hi)
        return np.minimum(a0, b0), np.minimum(a1, b1)

    def render(self):
        return f"min({self.a.render()}, {self.b.render()})"


@dataclass(frozen=True)
class PiecewiseLinear(Node):
    """Univariate piecewise-linear map applied to ``a``; constant outside the knots."""

    a: Node
    knots: tuple[float, ...]
    values: tuple[float, ...]

    def value(self, X):
        return np.interp(self.a.value(X), self.knots, self.values)

    def _slope(self, u):
        k = np.asarray(self.knots)
        v = np.asarray(self.values)
        slopes = np.concatenate([[0.0], np.diff(v) / np.diff(k), [0.0]])
        idx = np.searchsorted(k, u, side="right")
        return slopes[idx]

    def value_grad(self, X):
        u, g = self.a.value_grad(X)
        return np.interp(u, self.knots, self.values), self._slope(u)[:, None] * g

    def children(self):
        return (self.a,)

    def own_switches(self):
        return tuple(sub(self.a, Const(k)) for k in self.knots)

    def substitute(self, mapping):
        return PiecewiseLinear(self.a.substitute(mapping), self.knots, self.values)

    def bounds(self, lo, hi):
        return min(self.values), max(self.values)

    def render(self):
        ks = ", ".join(_fmt(k) for k in self.knots)
        vs = ", ".join(_fmt(v) for v in self.values)
        return f"pwl({self.a.render()}, ({ks},), ({vs},))"


@dataclass(frozen=True)
class Bump1(Node):
    """Compactly supported C^2 profile ``(1 - s^2)^3`` with ``s = (a - center)/radius``."""

    a: Node
    center: float
    radius: float

    def value(self, X):
        s = (self.a.value(X) - self.center) / self.radius
        q = np.clip(1.0 - s * s, 0.0, None)
        return q * q * q

    def value_grad(self, X):
        u, g = self.a.value_grad(X)
        s = (u - self.center) / self.radius
        q = np.clip(1.0 - s * s, 0.0, None)
        q2 = q * q
        d = (-6.0 / self.radius) * s * q2
        return q2 * q, d[:, None] * g

    def children(self):
        return (self.a,)

    def own_switches(self):
        return (
            sub(self.a, Const(self.center - self.radius)),
            sub(self.a, Const(self.center + self.radius)),
        )

    def substitute(self, mapping):
        return Bump1(self.a.substitute(mapping), self.center, self.radius)

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        s = np.minimum(np.abs(a0 - self.center), np.abs(a1 - self.center)) / self.radius
        top = np.maximum(0.0, 1.0 - s * s) ** 3
        return 0.0, np.where((a0 <= self.center) & (a1 >= self.center), 1.0, top)

    def render(self):
        return f"bump({self.a.render()}, {_fmt(self.center)}, {_fmt(self.radius)})"


@dataclass(frozen=True)
class SmoothStep(Node):
    """C^1 cubic ramp from 0 (``a <= lo``) to 1 (``a >= hi``)."""

    a: Node
    lo: float
    hi: float

    def value(self, X):
        t = np.clip((self.a.value(X) - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)

    def value_grad(self, X):
        u, g = self.a.value_grad(X)
        t = np.clip((u - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        d = 6.0 * t * (1.0 - t) / (self.hi - self.lo)
        return t * t * (3.0 - 2.0 * t), d[:, None] * g

    def children(self):
        return (self.a,)

    def own_switches(self):
        return (sub(self.a, Const(self.lo)), sub(self.a, Const(self.hi)))

    def substitute(self, mapping):
        return SmoothStep(self.a.substitute(mapping), self.lo, self.hi)

    def bounds(self, lo, hi):
        return 0.0, 1.0

    def render(self):
        return f"smoothstep({self.a.render()}, {_fmt(self.lo)}, {_fmt(self.hi)})"


# --------------------------------------------------------- smooth functions

_FUNCS = {
    "sin": (np.sin, np.cos),
    "cos": (np.cos, lambda u: -np.sin(u)),
    "exp": (np.exp, np.exp),
    "sqrt": (np.sqrt, lambda u: 0.5 / np.sqrt(u)),
}


@dataclass(frozen=True)
class Func(Node):
    name: str
    a: Node

    def value(self, X):
        return _FUNCS[self.name][0](self.a.value(X))

    def value_grad(self, X):
        f, df = _FUNCS[self.name]
        u, g = self.a.value_grad(X)
        return f(u), df(u)[:, None] * g

    def children(self):
        return (self.a,)

    def substitute(self, mapping):
        return Func(self.name, self.a.substitute(mapping))

    def bounds(self, lo, hi):
        a0, a1 = self.a.bounds(lo, hi)
        if self.name in ("sin", "cos"):
            return -1.0, 1.0
        with np.errstate(over="ignore"):
            if self.name == "exp":
                return np.exp(a0), np.exp(a1)
            return np.sqrt(np.maximum(a0, 0.0)), np.sqrt(np.maximum(a1, 0.0))

    def render(self):
        return f"{self.name}({self.a.render()})"


@dataclass(frozen=True)
class Atan2(Node):
    a: Node
    b: Node

    def value(self, X):
        return np.arctan2(self.a.value(X), self.b.value(X))

    def value_grad(self, X):
        va, ga = self.a.value_grad(X)
        vb, gb = self.b.value_grad(X)
        r2 = va * va + vb * vb
        return np.arctan2(va, vb), (vb[:, None] * ga - va[:, None] * gb) / r2[:, None]

    def children(self):
        return (self.a, self.b)

    def substitute(self, mapping):
        return Atan2(self.a.substitute(mapping), self.b.substitute(mapping))

    def bounds(self, lo, hi):
        return -math.pi, math.pi

    def render(self):
        return f"atan2({self.a.render()}, {self.b.render()})"


# ------------------------------------------------------------- composition


@dataclass(frozen=True)
class Compose(Node):
    """``child(maps(x))``; only built when ``child`` cannot absorb a substitution."""

    child: Node
    maps: tuple[Node, ...]

    def _mapped(self, X):
        return np.stack([m.value(X) for m in self.maps], axis=1)

    def value(self, X):
        return self.child.value(self._mapped(X))

    def value_grad(self, X):
        pairs = [m.value_grad(X) for m in self.maps]
        Y = np.stack([p[0] for p in pairs], axis=1)
        J = np.stack([p[1] for p in pairs], axis=1)  # (N, m, n)
        v, gy = self.child.value_grad(Y)
        return v, np.einsum("nm,nmk->nk", gy, J)

    def children(self):
        return self.maps

    def switches(self):
        out: dict[Node, None] = {}
        for s in self.child.switches():
            out[s.substitute(self.maps)] = None
        for m in self.maps:
            for s in m.switches():
                out[s] = None
        return tuple(out)

    def coords(self):
        out: frozenset[int] = frozenset()
        for i in self.child.coords():
            out |= self.maps[i].coords()
        return out

    def substitute(self, mapping):
        return compose(self.child, tuple(m.substitute(mapping) for m in self.maps))

    def bounds(self, lo, hi):
        bs = [np.broadcast_arrays(*m.bounds(lo, hi), lo[..., 0]) for m in self.maps]
        return self.child.bounds(np.stack([b[0] for b in bs], axis=-1), np.stack([b[1] for b in bs], axis=-1))

    def render(self):
        return f"compose({self.child.render()}, {', '.join(m.render() for m in self.maps)})"


# ------------------------------------------------------ Steklov averaging

STEKLOV_ORDER = 8
STEKLOV_SAMPLES = 6


def _shift_switches(child: Node, eps: float, n: int) -> tuple[Node, ...]:
    out: dict[Node, None] = {}
    half = 0.5 * eps
    for s in child.switches():
        dep = sorted(s.coords())
        if not dep:
            continue
        width = max(max(dep) + 1, n)
        for signs in itertools.product((-1.0, 1.0), repeat=len(dep)):
            mapping = [Coord(i) for i in range(width)]
            for i, sg in zip(dep, signs):
                mapping[i] = Add(Coord(i), Const(sg * half))
            out[s.substitute(tuple(mapping))] = None
    return tuple(out)


def face_averages(child: Node, eps: float, X: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Averages of ``child`` over the two faces of ``x + [-eps/2, eps/2]^n`` normal to ``axis``."""
    n = X.shape[1]
    N = X.shape[0]
    half = 0.5 * eps
    lo = np.concatenate([X - half, X - half])
    hi = np.concatenate([X + half, X + half])
    lo[:N, axis] = hi[:N, axis] = X[:, axis] + half
    lo[N:, axis] = hi[N:, axis] = X[:, axis] - half
    axes = tuple(i for i in range(n) if i != axis)
    vals = integrate_boxes(
        child.value,
        lo,
        hi,
        axes=axes,
        order=STEKLOV_ORDER,
        switches=child.switches(),
        samples=STEKLOV_SAMPLES,
    ) / eps ** (n - 1)
    return vals[:N], vals[N:]


@dataclass(frozen=True)
class Steklov(Node):
    """Cube average ``eps^-n \\int_{[-eps/2, eps/2]^n} child(x + t) dt``.

    The gradient is the exact face-difference formula, so no
    differentiability of ``child`` is needed.
    """

    child: Node
    eps: float
    n: int

    def value(self, X):
        X = X[:, : self.n]
        n = self.n
        half = 0.5 * self.eps
        return integrate_boxes(
            self.child.value,
            X - half,
            X + half,
            order=STEKLOV_ORDER,
            switches=self.child.switches(),
            samples=STEKLOV_SAMPLES,
        ) / self.eps**n

    def face_derivative(self, X, axis):
        X = X[:, : self.n]
        plus, minus = face_averages(self.child, self.eps, X, axis)
        return (plus - minus) / self.eps

    def value_grad(self, X):
        G = np.zeros(X.shape, dtype=float)
        for j in range(self.n):
            G[:, j] = self.face_derivative(X, j)
        return self.value(X), G

    def switches(self):
        return _shift_switches(self.child, self.eps, self.n)

    def coords(self):
        return self.child.coords()

    def substitute(self, mapping):
        return compose(self, mapping)

    def bounds(self, lo, hi):
        half = 0.5 * self.eps
        return self.child.bounds(np.asarray(lo) - half, np.asarray(hi) + half)

    def render(self):
        return f"steklov({self.child.render()}, {_fmt(self.eps)})"


@dataclass(frozen=True)
class SteklovDerivative(Node):
    """Face-difference field ``(A+_j - A-_j) / eps``, the exact ``d/dx_j`` of the average."""

    child: Node
    eps: float
    axis: int
    n: int

    def value(self, X):
        plus, minus = face_averages(self.child, self.eps, X[:, : self.n], self.axis)
        return (plus - minus) / self.eps

    def switches(self):
        return _shift_switches(self.child, self.eps, self.n)

    def coords(self):
        return self.child.coords() | {self.axis}

    def substitute(self, mapping):
        return compose(self, mapping)

    def render(self):
        return f"steklov_d({self.child.render()}, {_fmt(self.eps)}, {self.axis + 1})"


def det(M: np.ndarray) -> np.ndarray:
    """Batched determinant by LU with partial pivoting; exactly singular matrices give 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.linalg.det(M)


@dataclass(frozen=True)
class Minor(Node):
    """``coef * det[d factor_i / d x_{axes_j}]``, the coordinate coefficient of a simple form."""

    coef: Node
    factors: tuple[Node, ...]
    axes: tuple[int, ...]

    def value(self, X):
        c = self.coef.value(X)
        if not self.factors:
            return c
        M = np.stack([f.value_grad(X)[1][:, list(self.axes)] for f in self.factors], axis=1)
        return c * det(M)

    def children(self):
        return (self.coef, *self.factors)

    def coords(self):
        return super().coords() | frozenset(self.axes)

    def substitute(self, mapping):
        return compose(self, mapping)

    def render(self):
        fs = ", ".join(f.render() for f in self.factors)
        ax = ", ".join(str(a + 1) for a in self.axes)
        return f"jacdet({self.coef.render()}, ({fs},), ({ax},))"


# ---------------------------------------------------------- smart builders


def add(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.c + b.c)
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.c - b.c)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.c * b.c)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.c / b.c)
    return Div(a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.c)
    return Neg(a)


def is_identity_map(maps: tuple[Node, ...]) -> bool:
    return all(isinstance(m, Coord) and m.index == i for i, m in enumerate(maps))


def compose(child: Node, maps: tuple[Node, ...]) -> Node:
    if is_identity_map(maps):
        return child
    if isinstance(child, Compose):
        return compose(child.child, tuple(m.substitute(maps) for m in child.maps))
    return Compose(child, tuple(maps))
