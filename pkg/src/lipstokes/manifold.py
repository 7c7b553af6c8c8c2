"""Charts, pullbacks, partitions of unity and atlas-level Stokes checks.

A manifold is given only through its atlas.  Each chart carries explicit
forward and inverse maps as fields and a target :class:`Domain` in R^n or
H^n.  Forms live in ambient coordinates; every chart contribution is the
pullback of ``rho_alpha * omega`` along the chart inverse, integrated with
the flat integrators and summed in chart order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import nodes as nd
from .errors import ConfigError, PartitionError, UsageError
from .fields import SamplePlan, ScalarField, constant
from .forms import FormLike, FormSum, SimpleForm, as_form_sum, coefficient_values, exterior_derivative
from .integrate import Domain, GridSpec, integrate_boundary, integrate_interior
from .report import StokesReport, ladder

INVERSE_TOL = 1e-10
PARTITION_TOL = 1e-9


@dataclass(frozen=True)
class Chart:
    """A diffeomorphism ``forward: U -> target`` with explicit ``inverse``.

    ``period`` maps 1-based target axes to their period; forward values on
    those axes are compared modulo the period (angular coordinates).
    """

    label: str
    forward: tuple[ScalarField, ...]
    inverse: tuple[ScalarField, ...]
    target: Domain
    period: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(self.forward))
        object.__setattr__(self, "inverse", tuple(self.inverse))
        n = self.target.n
        if len(self.forward) != n or len(self.inverse) != n:
            raise ConfigError(f"chart {self.label!r}: need {n} forward and {n} inverse components")
        if any(f.arity != n for f in self.forward + self.inverse):
            raise ConfigError(f"chart {self.label!r}: component arity differs from target dimension {n}")

    @property
    def n(self) -> int:
        return self.target.n

    @property
    def is_identity(self) -> bool:
        return nd.is_identity_map(tuple(f.expr for f in self.forward)) and nd.is_identity_map(
            tuple(f.expr for f in self.inverse)
        )

    def to_ambient(self, Y: np.ndarray) -> np.ndarray:
        return np.stack([f.expr.value(Y) for f in self.inverse], axis=1)

    def to_target(self, X: np.ndarray) -> np.ndarray:
        return np.stack([f.expr.value(X) for f in self.forward], axis=1)

    def inverse_error(self, count: int = 200, seed: int = 0) -> float:
        """Largest round-trip error of ``forward o inverse`` and ``inverse o forward``.

        Points are jittered samples of the target box, so both directions are
        checked on the chart image.
        """
        Y = SamplePlan(self.target.box, count, seed).points()
        X = self.to_ambient(Y)
        dy = self.to_target(X) - Y
        for axis, p in self.period.items():
            c = dy[:, axis - 1]
            dy[:, axis - 1] = c - p * np.round(c / p)
        dx = self.to_ambient(self.to_target(X)) - X
        ey = np.max(np.abs(dy) / (1.0 + np.abs(Y)))
        ex = np.max(np.abs(dx) / (1.0 + np.abs(X)))
        return float(max(ey, ex))

    def validate(self, count: int = 200, seed: int = 0) -> None:
        err = self.inverse_error(count, seed)
        if not err <= INVERSE_TOL:
            raise ConfigError(f"chart {self.label!r}: forward and inverse disagree by {err:.3g}")


def identity_chart(domain: Domain, label: str = "identity") -> Chart:
    ident = tuple(ScalarField(nd.Coord(i), domain.n, 1.0) for i in range(domain.n))
    return Chart(label, ident, ident, domain)


# ------------------------------------------------------------ pullbacks


def _pull_field(f: ScalarField, maps: tuple[ScalarField, ...]) -> ScalarField:
    return f.compose(maps)


def pullback(chart: Chart, form: FormLike) -> FormLike:
    """``(f o psi) d(g_1 o psi) ^ ... ^ d(g_k o psi)`` with ``psi = chart.inverse``."""
    fs = as_form_sum(form)
    if fs.n != chart.n:
        raise UsageError(f"form lives in R^{fs.n}, chart in R^{chart.n}")
    if nd.is_identity_map(tuple(f.expr for f in chart.inverse)):
        return form
    pulled = fs.map_fields(lambda f: _pull_field(f, chart.inverse))
    return pulled if isinstance(form, FormSum) else pulled.terms[0]


def scale_by_bump(rho: ScalarField, form: FormLike, box=None) -> FormLike:
    """Multiply every coefficient by ``rho``.

    With ``box`` given and both Lipschitz bounds declared, the bound of the
    new coefficient is ``Lip(rho) sup|f| + sup|rho| Lip(f)`` over the box.
    """
    fs = as_form_sum(form)
    if rho.arity != fs.n:
        raise UsageError("bump and form have different arity")
    if isinstance(rho.expr, nd.Const) and rho.expr.c == 1.0:
        return form

    def scaled(f: ScalarField) -> ScalarField:
        lip = None
        if box is not None and rho.lip_bound is not None and f.lip_bound is not None:
            lip = rho.lip_bound * f.sup_abs(box) + rho.sup_abs(box) * f.lip_bound
        return ScalarField(nd.mul(rho.expr, f.expr), fs.n, lip)

    terms = tuple(SimpleForm(scaled(t.coefficient), t.factors, t.n) for t in fs.terms)
    out = FormSum(terms, fs.n, fs.degree)
    return out if isinstance(form, FormSum) else out.terms[0]


def naturality_gap(chart: Chart, form: FormLike, Y: np.ndarray) -> float:
    """Max deviation between ``d(psi^* omega)`` and ``psi^* (d omega)`` at points ``Y``.

    The first route differentiates the composed fields (chain rule inside
    the expression trees).  The second evaluates ``d omega`` at ``psi(y)``
    and multiplies by the minors of the Jacobian of ``psi`` (Cauchy-Binet).
    """
    fs = as_form_sum(form)
    n, k = fs.n, fs.degree + 1
    left = exterior_derivative(pullback(chart, fs))
    right = exterior_derivative(fs)
    X = chart.to_ambient(Y)
    D = np.stack([f.value_grad(Y)[1] for f in chart.inverse], axis=1)  # (N, n, n): d psi_i / d y_j
    combos = list(itertools.combinations(range(1, n + 1), k))
    worst = 0.0
    for J in combos:
        lv = coefficient_values(left, J, Y)
        rv = np.zeros(Y.shape[0])
        for I in combos:
            minor = nd.det(D[:, [i - 1 for i in I]][:, :, [j - 1 for j in J]])
            rv = rv + coefficient_values(right, I, X) * minor
        worst = max(worst, float(np.max(np.abs(lv - rv))))
    return worst


# ------------------------------------------------------- partitions


@dataclass(frozen=True)
class Atlas:
    """Charts with one bump per chart.

    ``region`` is a field that is ``>= 0`` exactly on the manifold (used to
    restrict partition checks); ``support_box`` bounds it in ambient
    coordinates.
    """

    charts: tuple[Chart, ...]
    bumps: tuple[ScalarField, ...]
    support_box: tuple[tuple[float, float], ...]
    region: ScalarField | None = None

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(self, "bumps", tuple(self.bumps))
        if not self.charts:
            raise ConfigError("atlas needs at least one chart")
        if len(self.bumps) != len(self.charts):
            raise ConfigError(f"atlas has {len(self.charts)} charts but {len(self.bumps)} bumps")
        n = self.charts[0].n
        if any(c.n != n for c in self.charts) or any(b.arity != n for b in self.bumps):
            raise ConfigError("charts and bumps must share one dimension")

    @property
    def n(self) -> int:
        return self.charts[0].n

    @classmethod
    def normalized(cls, charts, plateaus, support_box, region=None) -> Atlas:
        """Partition ``rho_a = p_a / sum_b p_b`` from nonnegative plateaus ``p_a``."""
        plateaus = tuple(plateaus)
        if len(plateaus) == 1:
            return cls(tuple(charts), (constant(1.0, plateaus[0].arity),), support_box, region)
        total = plateaus[0].expr
        for p in plateaus[1:]:
            total = nd.Add(total, p.expr)
        bumps = tuple(ScalarField(nd.Div(p.expr, total), p.arity) for p in plateaus)
        return cls(tuple(charts), bumps, support_box, region)

    def sample_points(self, count: int = 400, seed: int = 0) -> np.ndarray:
        X = SamplePlan(self.support_box, count, seed).points()
        if self.region is not None:
            X = X[self.region.expr.value(X) >= 0.0]
        return X

    def partition_defect(self, count: int = 400, seed: int = 0) -> tuple[float, float]:
        """``(max |sum rho - 1|, most negative rho)`` over sampled manifold points."""
        X = self.sample_points(count, seed)
        vals = np.stack([b.expr.value(X) for b in self.bumps])
        return float(np.max(np.abs(vals.sum(axis=0) - 1.0))), float(min(0.0, vals.min()))

    def check_partition(self, count: int = 400, seed: int = 0) -> float:
        dev, neg = self.partition_defect(count, seed)
        if dev > PARTITION_TOL:
            raise PartitionError(f"partition of unity sums deviate from 1 by {dev:.3g}")
        if neg < -PARTITION_TOL:
            raise PartitionError(f"partition of unity takes negative value {neg:.3g}")
        return dev

    def validate(self, count: int = 200, seed: int = 0) -> None:
        for c in self.charts:
            c.validate(count, seed)
        self.check_partition(2 * count, seed)


def chart_forms(atlas: Atlas, form: FormLike) -> list[FormLike]:
    """``psi_a^*(rho_a omega)`` for every chart, in chart order."""
    return [pullback(c, scale_by_bump(b, form, atlas.support_box)) for c, b in zip(atlas.charts, atlas.bumps)]


def manifold_pair(atlas: Atlas, form: FormLike, grid: GridSpec, cells: int | None = None,
                  flip_sign: bool = False) -> tuple[float, float]:
    """``(sum of boundary integrals, sum of interior integrals)`` over the charts."""
    fs = as_form_sum(form)
    if fs.degree != fs.n - 1:
        raise UsageError(f"Stokes check needs a degree-{fs.n - 1} form")
    boundary = 0.0
    interior = 0.0
    for chart, pulled in zip(atlas.charts, chart_forms(atlas, fs)):
        boundary += integrate_boundary(pulled, chart.target, grid, cells, flip_sign=flip_sign)
        d = exterior_derivative(pulled) if as_form_sum(pulled).terms else FormSum.zero(fs.n, fs.n)
        interior += integrate_interior(d, chart.target, grid, cells)
    return boundary, interior


def stokes_manifold(atlas: Atlas, form: FormLike, grid: GridSpec, flip_sign: bool = False,
                    validate: bool = True) -> StokesReport:
    """Chart-summed Stokes report over the refinement ladder of ``grid``."""
    if validate:
        atlas.validate()
    rows = ladder(lambda m: manifold_pair(atlas, form, grid, m, flip_sign), grid.cells, grid.levels)
    return StokesReport.from_rows(rows)
