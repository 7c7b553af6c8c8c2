"""Simple Lipschitz forms ``f dg_1 ^ ... ^ dg_k`` and finite sums of them.

Exterior derivatives are kept lazy: ``d(f dg_1 ^ ... ^ dg_k)`` is the simple
form ``1 df ^ dg_1 ^ ... ^ dg_k``.  Coordinate coefficients are evaluated
pointwise as ``f * det(dg_i / dx_{I_j})`` (LU with partial pivoting).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import nodes as nd
from .errors import UsageError
from .fields import ScalarField, constant


@dataclass(frozen=True)
class SimpleForm:
    coefficient: ScalarField
    factors: tuple[ScalarField, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not 0 <= len(self.factors) <= self.n:
            raise UsageError(f"degree {len(self.factors)} outside 0..{self.n}")
        for f in (self.coefficient, *self.factors):
            if f.arity != self.n:
                raise UsageError(f"member field has arity {f.arity}, form lives in R^{self.n}")

    @property
    def degree(self) -> int:
        return len(self.factors)

    def fields(self) -> tuple[ScalarField, ...]:
        return (self.coefficient, *self.factors)

    def map_fields(self, fn) -> SimpleForm:
        return SimpleForm(fn(self.coefficient), tuple(fn(g) for g in self.factors), self.n)


@dataclass(frozen=True)
class FormSum:
    terms: tuple[SimpleForm, ...]
    n: int
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.n != self.n or t.degree != self.degree:
                raise UsageError("all terms of a FormSum need equal dimension and degree")

    @classmethod
    def zero(cls, n: int, degree: int) -> FormSum:
        return cls((), n, degree)

    def fields(self) -> tuple[ScalarField, ...]:
        return tuple(f for t in self.terms for f in t.fields())

    def map_fields(self, fn) -> FormSum:
        return FormSum(tuple(t.map_fields(fn) for t in self.terms), self.n, self.degree)

    def __add__(self, other: FormLike) -> FormSum:
        o = as_form_sum(other)
        if (o.n, o.degree) != (self.n, self.degree):
            raise UsageError("cannot add forms of different dimension or degree")
        return FormSum(self.terms + o.terms, self.n, self.degree)


FormLike = Union[SimpleForm, FormSum]


@dataclass(frozen=True)
class TopFormField:
    """``b dx_1 ^ ... ^ dx_n`` with ``b`` an evaluable field."""

    b: ScalarField

    @property
    def n(self) -> int:
        return self.b.arity

    @classmethod
    def from_form(cls, form: FormLike) -> TopFormField:
        fs = as_form_sum(form)
        if fs.degree != fs.n:
            raise UsageError(f"degree {fs.degree} form is not a top form in R^{fs.n}")
        return cls(coefficient_field(fs, tuple(range(1, fs.n + 1))))


def as_form_sum(form: FormLike) -> FormSum:
    if isinstance(form, FormSum):
        return form
    return FormSum((form,), form.n, form.degree)


def simple_form(coefficient: ScalarField, factors=(), n: int | None = None) -> SimpleForm:
    n = coefficient.arity if n is None else n
    return SimpleForm(coefficient, tuple(factors), n)


def exterior_derivative(form: FormLike) -> FormLike:
    """Leibniz rule ``d(f dg_1 ^ ... ^ dg_k) = df ^ dg_1 ^ ... ^ dg_k``."""
    if isinstance(form, FormSum):
        if form.degree >= form.n:
            raise UsageError("top-degree forms have zero exterior derivative")
        return FormSum(tuple(exterior_derivative(t) for t in form.terms), form.n, form.degree + 1)
    if form.degree >= form.n:
        raise UsageError("top-degree forms have zero exterior derivative")
    one = constant(1.0, form.n)
    return SimpleForm(one, (form.coefficient, *form.factors), form.n)


def _check_axes(axes, n, k) -> tuple[int, ...]:
    axes = tuple(int(a) for a in axes)
    if len(axes) != k:
        raise UsageError(f"multi-index {axes} must have length {k}")
    if any(not 1 <= a <= n for a in axes) or any(b <= a for a, b in zip(axes, axes[1:])):
        raise UsageError(f"multi-index {axes} must be strictly increasing in 1..{n}")
    return axes


def _points(x, n) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != n:
        raise UsageError(f"points have dimension {X.shape[1]}, form lives in R^{n}")
    return X, single


def _term_coefficient(term: SimpleForm, cols: list[int], X: np.ndarray) -> np.ndarray:
    c = term.coefficient.expr.value(X)
    if not term.factors:
        return c
    M = np.stack([g.value_grad(X)[1][:, cols] for g in term.factors], axis=1)
    return c * nd.det(M)


def coefficient_values(form: FormLike, axes, X: np.ndarray) -> np.ndarray:
    """Batch version of :func:`coefficient` for points ``X`` of shape ``(N, n)``."""
    fs = as_form_sum(form)
    axes = _check_axes(axes, fs.n, fs.degree)
    cols = [a - 1 for a in axes]
    out = np.zeros(X.shape[0])
    for t in fs.terms:
        out = out + _term_coefficient(t, cols, X)
    return out


def coefficient(form: FormLike, axes, x):
    """Coefficient of ``dx_{I_1} ^ ... ^ dx_{I_k}`` at ``x`` (1-based ``axes``)."""
    fs = as_form_sum(form)
    X, single = _points(x, fs.n)
    v = coefficient_values(fs, axes, X)
    return float(v[0]) if single else v


def volume_coefficient(dform: FormLike, x):
    fs = as_form_sum(dform)
    if fs.degree != fs.n:
        raise UsageError(f"volume coefficient needs a degree-{fs.n} form, got degree {fs.degree}")
    return coefficient(fs, tuple(range(1, fs.n + 1)), x)


def tangential_coefficient(form: FormLike, xb):
    """``a(x', 0)``: the ``dx_1 ^ ... ^ dx_{n-1}`` coefficient on ``{x_n = 0}``."""
    fs = as_form_sum(form)
    if fs.degree != fs.n - 1:
        raise UsageError(f"tangential coefficient needs a degree-{fs.n - 1} form")
    Xb = np.asarray(xb, dtype=float)
    single = Xb.ndim <= 1
    Xb = Xb.reshape(1, -1) if single else Xb
    if Xb.shape[1] != fs.n - 1:
        raise UsageError(f"boundary points must have dimension {fs.n - 1}")
    X = np.concatenate([Xb, np.zeros((Xb.shape[0], 1))], axis=1)
    v = coefficient_values(fs, tuple(range(1, fs.n)), X)
    return float(v[0]) if single else v


def coefficient_field(form: FormLike, axes) -> ScalarField:
    """The coordinate coefficient as an evaluable field (gradient by finite differences)."""
    fs = as_form_sum(form)
    axes = _check_axes(axes, fs.n, fs.degree)
    cols = tuple(a - 1 for a in axes)
    expr: nd.Node = nd.Const(0.0)
    for t in fs.terms:
        term = nd.Minor(t.coefficient.expr, tuple(g.expr for g in t.factors), cols)
        expr = term if isinstance(expr, nd.Const) and expr.c == 0.0 else nd.Add(expr, term)
    return ScalarField(expr, fs.n)


def restrict_to_boundary(form: FormLike) -> FormSum:
    """Pull the form back along ``x' -> (x', 0)``; a form on R^{n-1}."""
    fs = as_form_sum(form)
    if fs.n < 2:
        raise UsageError("the boundary of H^1 is a point; restriction is handled by the integrator")
    if fs.degree != fs.n - 1:
        raise UsageError(f"restriction needs a degree-{fs.n - 1} form")
    m = fs.n - 1
    emb = tuple(nd.Coord(i) for i in range(m)) + (nd.Const(0.0),)

    def restrict(f: ScalarField) -> ScalarField:
        return ScalarField(f.expr.substitute(emb), m, f.lip_bound, f.derivative_mode)

    terms = tuple(SimpleForm(restrict(t.coefficient), tuple(restrict(g) for g in t.factors), m) for t in fs.terms)
    return FormSum(terms, m, m)


def form_switches(form: FormLike) -> tuple[nd.Node, ...]:
    out: dict[nd.Node, None] = {}
    for f in as_form_sum(form).fields():
        for s in f.switches():
            out[s] = None
    return tuple(out)
