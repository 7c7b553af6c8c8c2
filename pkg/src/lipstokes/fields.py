"""Evaluable Lipschitz scalar fields with almost-everywhere partial derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import nodes as nd
from .errors import UsageError


def _as_points(x, arity: int) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = np.atleast_2d(X) if X.ndim == 1 else X.reshape(1, -1) if X.ndim == 0 else X
    if X.shape[1] != arity:
        raise UsageError(f"point has dimension {X.shape[1]}, field has arity {arity}")
    return X, single


@dataclass(frozen=True)
class ScalarField:
    """A Lipschitz map R^n -> R built from an expression tree.

    ``derivative_mode`` is ``"analytic"`` (tree rules, a.e.) or ``"fd"``
    (central differences with step ``max(1e-6, 1e-8 (1 + |x_j|))``).
    """

    expr: nd.Node
    arity: int
    lip_bound: float | None = None
    derivative_mode: str = "analytic"

    def __post_init__(self):
        if self.arity < 1:
            raise UsageError("arity must be >= 1")
        if self.derivative_mode not in ("analytic", "fd"):
            raise UsageError(f"unknown derivative mode {self.derivative_mode!r}")
        used = self.expr.coords()
        if used and max(used) >= self.arity:
            raise UsageError(f"expression uses x{max(used) + 1} but arity is {self.arity}")
        if self.lip_bound is not None and self.lip_bound < 0:
            raise UsageError("lip_bound must be nonnegative")

    # -- evaluation --------------------------------------------------------

    def eval(self, x):
        X, single = _as_points(x, self.arity)
        v = self.expr.value(X)
        return float(v[0]) if single else v

    __call__ = eval

    def gradient(self, x):
        X, single = _as_points(x, self.arity)
        if self.derivative_mode == "fd":
            G = nd.fd_gradient(self.expr, X)
        else:
            G = self.expr.value_grad(X)[1]
        return G[0] if single else G

    def value_grad(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batch value and gradient for ``X`` of shape ``(N, arity)``."""
        if self.derivative_mode == "fd":
            return self.expr.value(X), nd.fd_gradient(self.expr, X)
        return self.expr.value_grad(X)

    def partial(self, j: int, x):
        """a.e. partial derivative along axis ``j`` (1-based)."""
        if not 1 <= j <= self.arity:
            raise UsageError(f"axis {j} out of range 1..{self.arity}")
        G = self.gradient(x)
        return G[..., j - 1] if np.ndim(G) > 1 else float(G[j - 1])

    # -- structure ---------------------------------------------------------

    def switches(self) -> tuple[nd.Node, ...]:
        return self.expr.switches()

    def sup_abs(self, box) -> float:
        """Upper bound for ``|f|`` over ``box`` by interval evaluation."""
        lo = np.array([b[0] for b in box], dtype=float)
        hi = np.array([b[1] for b in box], dtype=float)
        a, b = self.expr.bounds(lo, hi)
        return float(np.max(np.abs([a, b])))

    def with_lip(self, lip_bound: float | None) -> ScalarField:
        return replace(self, lip_bound=lip_bound)

    def compose(self, maps: tuple[ScalarField, ...]) -> ScalarField:
        """``self(maps(y))``; the result has the maps' arity."""
        if len(maps) != self.arity:
            raise UsageError(f"need {self.arity} component maps, got {len(maps)}")
        arity = maps[0].arity
        if any(m.arity != arity for m in maps):
            raise UsageError("component maps disagree on arity")
        expr = self.expr.substitute(tuple(m.expr for m in maps))
        return ScalarField(expr, arity, derivative_mode=self.derivative_mode)

    def render(self) -> str:
        return self.expr.render()

    def __str__(self) -> str:
        return self.render()

    # -- arithmetic --------------------------------------------------------

    def _lift(self, other) -> ScalarField:
        if isinstance(other, ScalarField):
            if other.arity != self.arity:
                raise UsageError("fields of different arity")
            return other
        return constant(float(other), self.arity)

    def __add__(self, other):
        o = self._lift(other)
        lip = None if self.lip_bound is None or o.lip_bound is None else self.lip_bound + o.lip_bound
        return ScalarField(nd.add(self.expr, o.expr), self.arity, lip)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        lip = None if self.lip_bound is None or o.lip_bound is None else self.lip_bound + o.lip_bound
        return ScalarField(nd.sub(self.expr, o.expr), self.arity, lip)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, ScalarField):
            c = float(other)
            lip = None if self.lip_bound is None else abs(c) * self.lip_bound
            return ScalarField(nd.mul(nd.Const(c), self.expr), self.arity, lip)
        o = self._lift(other)
        return ScalarField(nd.mul(self.expr, o.expr), self.arity)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return ScalarField(nd.div(self.expr, o.expr), self.arity)

    def __neg__(self):
        return ScalarField(nd.neg(self.expr), self.arity, self.lip_bound)


# ----------------------------------------------------------- constructors


def constant(c: float, arity: int) -> ScalarField:
    return ScalarField(nd.Const(float(c)), arity, 0.0)


def coordinate(j: int, arity: int) -> ScalarField:
    """The coordinate function ``x_j`` (1-based)."""
    if not 1 <= j <= arity:
        raise UsageError(f"coordinate x{j} out of range for arity {arity}")
    return ScalarField(nd.Coord(j - 1), arity, 1.0)


def absolute(f: ScalarField) -> ScalarField:
    return ScalarField(nd.Abs(f.expr), f.arity, f.lip_bound)


def maximum(f: ScalarField, g: ScalarField) -> ScalarField:
    lip = None if f.lip_bound is None or g.lip_bound is None else max(f.lip_bound, g.lip_bound)
    return ScalarField(nd.Max(f.expr, g.expr), f.arity, lip)


def minimum(f: ScalarField, g: ScalarField) -> ScalarField:
    lip = None if f.lip_bound is None or g.lip_bound is None else max(f.lip_bound, g.lip_bound)
    return ScalarField(nd.Min(f.expr, g.expr), f.arity, lip)


def bump(center, radius: float, arity: int) -> ScalarField:
    """Tensor-product C^2 bump ``prod_j (1 - ((x_j - c_j)/r)^2)^3_+``."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (arity,))
    expr: nd.Node = nd.Bump1(nd.Coord(0), float(c[0]), float(radius))
    for j in range(1, arity):
        expr = nd.Mul(expr, nd.Bump1(nd.Coord(j), float(c[j]), float(radius)))
    return ScalarField(expr, arity)


def identity_maps(arity: int) -> tuple[ScalarField, ...]:
    return tuple(coordinate(j, arity) for j in range(1, arity + 1))


# ------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SamplePlan:
    """Jittered lattice of ``count`` points in an axis-aligned box.

    Lattice cells are perturbed by uniform offsets of ``jitter_scale`` cell
    widths (0.5 = half a cell), so almost-everywhere statements avoid
    measure-zero kink sets.  Degenerate box axes (``lo == hi``) stay pinned.
    """

    box: tuple[tuple[float, float], ...]
    count: int
    jitter_seed: int = 0
    jitter_scale: float = 0.5
    extra_points: tuple[tuple[float, ...], ...] = field(default=())

    def __post_init__(self):
        if self.count < 0:
            raise UsageError("count must be nonnegative")
        if not 0.0 < self.jitter_scale <= 0.5:
            raise UsageError("jitter_scale must lie in (0, 0.5]")
        for lo, hi in self.box:
            if hi < lo:
                raise UsageError(f"empty box interval [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.box)

    def free_axes(self) -> tuple[int, ...]:
        return tuple(i for i, (lo, hi) in enumerate(self.box) if hi > lo)

    def points(self) -> np.ndarray:
        lo = np.array([b[0] for b in self.box], dtype=float)
        hi = np.array([b[1] for b in self.box], dtype=float)
        free = self.free_axes()
        rng = np.random.default_rng(self.jitter_seed)
        pts = np.tile(lo, (self.count, 1))
        if self.count and free:
            k = max(1, math.ceil(self.count ** (1.0 / len(free)) - 1e-9))
            cells = rng.choice(k ** len(free), size=self.count, replace=k ** len(free) < self.count)
            idx = np.stack(np.unravel_index(cells, (k,) * len(free)), axis=1)
            for col, ax in enumerate(free):
                h = (hi[ax] - lo[ax]) / k
                jitter = rng.uniform(-self.jitter_scale, self.jitter_scale, self.count)
                pts[:, ax] = lo[ax] + (idx[:, col] + 0.5 + jitter) * h
            pts = np.clip(pts, lo, hi)
        if self.extra_points:
            pts = np.concatenate([pts, np.asarray(self.extra_points, dtype=float)])
        return pts

    def boundary_slice(self) -> SamplePlan:
        """Same plan on the face ``x_n = 0`` of the box."""
        box = (*self.box[:-1], (0.0, 0.0))
        return replace(self, box=box, extra_points=())


def lipschitz_estimate(f: ScalarField, plan: SamplePlan, pair_limit: int = 2000) -> float:
    """Largest difference quotient over sampled pairs (a lower bound on Lip f).

    Pairs are all pairs among the first ``pair_limit`` plan points plus, for
    every plan point, a short pair along the local gradient direction.
    """
    X = plan.points()
    if X.shape[0] == 0:
        raise UsageError("empty sample plan")
    if X.shape[1] != f.arity:
        raise UsageError("plan dimension does not match field arity")
    best = 0.0
    Y = X[:pair_limit]
    v = f.expr.value(Y)
    for i in range(Y.shape[0] - 1):
        d = np.linalg.norm(Y[i + 1:] - Y[i], axis=1)
        ok = d > 0
        if np.any(ok):
            best = max(best, float(np.max(np.abs(v[i + 1:][ok] - v[i]) / d[ok])))

    lo = np.array([b[0] for b in plan.box])
    hi = np.array([b[1] for b in plan.box])
    delta = 1e-2 * max(float(np.max(hi - lo)), 1e-12)
    val, G = f.value_grad(X)
    norms = np.linalg.norm(G, axis=1)
    ok = norms > 0
    if np.any(ok):
        step = delta * G[ok] / norms[ok, None]
        base = X[ok]
        # step inward when the forward point would leave the box
        fwd = base + step
        back = np.any((fwd < lo) | (fwd > hi), axis=1)
        fwd[back] = base[back] - step[back]
        dist = np.linalg.norm(fwd - base, axis=1)
        q = np.abs(f.expr.value(fwd) - val[ok]) / dist
        best = max(best, float(np.max(q)))
    return best
