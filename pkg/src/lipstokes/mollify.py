"""Steklov averaging of fields and forms, schedules, and a.e.-convergence probes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nodes as nd
from .errors import UsageError
from .fields import SamplePlan, ScalarField
from .forms import FormLike, FormSum, SimpleForm


@dataclass(frozen=True)
class MollificationSchedule:
    """Geometric widths ``eps_s = eps0 * ratio**s`` for ``s = 0..count-1``."""

    eps0: float
    ratio: float
    count: int

    def __post_init__(self):
        if self.eps0 <= 0:
            raise UsageError("eps0 must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise UsageError("ratio must lie in (0, 1)")
        if self.count < 1:
            raise UsageError("count must be >= 1")

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(self.eps0 * self.ratio**s for s in range(self.count))

    def __iter__(self):
        return iter(self.widths)


def _reflected(f: ScalarField) -> nd.Node:
    n = f.arity
    maps = tuple(nd.Coord(i) for i in range(n - 1)) + (nd.Abs(nd.Coord(n - 1)),)
    return f.expr.substitute(maps)


def steklov_average(f: ScalarField, eps: float, reflect: bool = False) -> ScalarField:
    """The cube average ``f_eps(x) = eps^-n \\int_{[-eps/2, eps/2]^n} f(x + t) dt``.

    With ``reflect=True`` the field is first extended evenly across
    ``x_n = 0`` (for use on the half-space).
    """
    if not eps > 0:
        raise UsageError("eps must be positive")
    child = _reflected(f) if reflect else f.expr
    return ScalarField(nd.Steklov(child, float(eps), f.arity), f.arity, f.lip_bound)


def steklov_partial(f: ScalarField, eps: float, j: int, reflect: bool = False) -> ScalarField:
    """``x -> (A+_j(x) - A-_j(x)) / eps`` from the two face averages normal to axis ``j``."""
    if not eps > 0:
        raise UsageError("eps must be positive")
    if not 1 <= j <= f.arity:
        raise UsageError(f"axis {j} out of range 1..{f.arity}")
    child = _reflected(f) if reflect else f.expr
    return ScalarField(nd.SteklovDerivative(child, float(eps), j - 1, f.arity), f.arity, None, "fd")


def mollify_form(form: FormLike, eps: float, reflect: bool = False):
    """Replace every member field of the form by its Steklov average."""
    return form.map_fields(lambda g: steklov_average(g, eps, reflect))


@dataclass
class ProbeReport:
    """Outcome of :func:`convergence_probe`.

    ``fractions[j]`` is the share of points where the last-width derivative
    is within ``tol`` of the a.e. derivative along axis ``j`` (1-based);
    ``max_deviation[j]`` lists the per-width maxima for trend inspection.
    """

    widths: tuple[float, ...]
    tol: float
    npoints: int
    fractions: dict[int, float] = field(default_factory=dict)
    max_deviation: dict[int, list[float]] = field(default_factory=dict)
    failures: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def min_fraction(self) -> float:
        return min(self.fractions.values()) if self.fractions else 1.0


def convergence_probe(
    f: ScalarField,
    sched: MollificationSchedule,
    plan: SamplePlan,
    tol: float,
    reflect: bool = False,
) -> ProbeReport:
    """Compare ``steklov_partial(f, eps_s, j)`` with ``partial(f, j)`` on the plan.

    Only the free axes of the plan box are probed, so a plan on the slice
    ``x_n = 0`` checks tangential derivatives there.
    """
    X = plan.points()
    if X.shape[1] != f.arity:
        raise UsageError("plan dimension does not match field arity")
    G = f.gradient(X) if X.shape[0] else np.zeros((0, f.arity))
    rep = ProbeReport(tuple(sched.widths), tol, X.shape[0])
    child = _reflected(f) if reflect else f.expr
    axes = [a for a in plan.free_axes()]
    for ax in axes:
        devs = []
        last = None
        for eps in sched.widths:
            node = nd.SteklovDerivative(child, float(eps), ax, f.arity)
            dev = np.abs(node.value(X) - G[:, ax]) if X.shape[0] else np.zeros(0)
            devs.append(float(dev.max()) if dev.size else 0.0)
            last = dev
        ok = last < tol
        rep.fractions[ax + 1] = float(ok.mean()) if ok.size else 1.0
        rep.max_deviation[ax + 1] = devs
        rep.failures[ax + 1] = X[~ok]
    return rep
