"""Tensor-grid integration of top forms and of (n-1)-forms on ``{x_n = 0}``.

Boundary orientation: the outward normal followed by the boundary frame is
positively oriented.  On the half-space the outward normal is ``-e_n``, which
gives the sign ``(-1)**n`` relative to the standard orientation of R^{n-1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SupportLeakError, UsageError
from .forms import FormLike, as_form_sum, coefficient_values, exterior_derivative, form_switches, restrict_to_boundary
from .quadrature import integrate_boxes

FULL_SPACE = "full-space"
HALF_SPACE = "half-space"
LEAK_TOL = 1e-9
MAX_DIM = 4
_CHUNK = 200_000


@dataclass(frozen=True)
class Domain:
    """Box-truncated R^n or H^n.  ``periodic`` lists 1-based axes whose faces are identified."""

    kind: str
    box: tuple[tuple[float, float], ...]
    periodic: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))
        object.__setattr__(self, "periodic", tuple(int(p) for p in self.periodic))
        if self.kind not in (FULL_SPACE, HALF_SPACE):
            raise ConfigError(f"domain kind must be {FULL_SPACE!r} or {HALF_SPACE!r}, got {self.kind!r}")
        if not 1 <= self.n <= MAX_DIM:
            raise ConfigError(f"dimension {self.n} outside 1..{MAX_DIM}")
        for i, (a, b) in enumerate(self.box):
            if not b > a:
                raise ConfigError(f"support box axis x{i + 1} is empty: [{a}, {b}]")
        if self.kind == HALF_SPACE and self.box[-1][0] != 0.0:
            raise ConfigError(f"half-space box must start at x{self.n} = 0, got {self.box[-1][0]}")
        for p in self.periodic:
            if not 1 <= p <= self.n or (self.kind == HALF_SPACE and p == self.n):
                raise ConfigError(f"invalid periodic axis {p}")

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.box])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.box])


@dataclass(frozen=True)
class GridSpec:
    """Cells per axis on the coarsest level, quadrature rule and ladder length.

    ``rule`` is ``"midpoint"`` (cell centres, optionally shifted once by
    ``jitter`` cell widths) or ``"gauss"`` (Gauss-Legendre of ``order`` on
    each smooth piece of each cell, pieces cut at kink surfaces).
    """

    cells: int = 32
    rule: str = "midpoint"
    order: int = 2
    levels: int = 1
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.cells < 2:
            raise ConfigError("cells per axis must be >= 2")
        if self.rule not in ("midpoint", "gauss"):
            raise ConfigError(f"unknown quadrature rule {self.rule!r}")
        if self.order < 1:
            raise ConfigError("gauss order must be >= 1")
        if self.levels < 1:
            raise ConfigError("levels must be >= 1")
        if not 0.0 <= self.jitter < 0.5:
            raise ConfigError("jitter must lie in [0, 0.5)")

    def cells_at(self, level: int) -> int:
        return self.cells * 2**level

    @property
    def finest(self) -> int:
        return self.cells_at(self.levels - 1)

    def offsets(self, dim: int) -> np.ndarray:
        if self.jitter == 0.0:
            return np.zeros(dim)
        rng = np.random.default_rng(self.seed)
        return rng.uniform(-self.jitter, self.jitter, dim)


@dataclass
class RefinementRow:
    level: int
    m: int
    value: float
    diff: float | None = None


# ----------------------------------------------------------------- grids


def _cell_centres(lo, hi, m, offsets):
    axes = [lo[i] + (np.arange(m) + 0.5 + offsets[i]) * (hi[i] - lo[i]) / m for i in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _cell_boxes(lo, hi, m):
    edges = [np.linspace(lo[i], hi[i], m + 1) for i in range(len(lo))]
    idx = np.stack([g.ravel() for g in np.meshgrid(*[np.arange(m)] * len(lo), indexing="ij")], axis=1)
    clo = np.stack([edges[i][idx[:, i]] for i in range(len(lo))], axis=1)
    chi = np.stack([edges[i][idx[:, i] + 1] for i in range(len(lo))], axis=1)
    return clo, chi


def grid_integral(func, lo, hi, grid: GridSpec, m: int, switches=()) -> float:
    """Integrate ``func`` (points -> values) over the box ``[lo, hi]`` on an m^d grid."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    if grid.rule == "midpoint":
        pts = _cell_centres(lo, hi, m, grid.offsets(d))
        vol = float(np.prod((hi - lo) / m))
        vals = np.concatenate([func(pts[s:s + _CHUNK]) for s in range(0, pts.shape[0], _CHUNK)])
        return float(np.sum(vals) * vol)
    clo, chi = _cell_boxes(lo, hi, m)
    per_cell = integrate_boxes(func, clo, chi, order=grid.order, switches=switches, samples=2)
    return float(np.sum(per_cell))


# ---------------------------------------------------------- leak checks


def _face_points(lo, hi, axis, side, res):
    d = lo.size
    axes = []
    for i in range(d):
        if i == axis:
            axes.append(np.array([hi[i] if side else lo[i]]))
        else:
            axes.append(np.linspace(lo[i], hi[i], res + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _scan_faces(valuefn, lo, hi, faces, res, what):
    for axis, side, label in faces:
        pts = _face_points(lo, hi, axis, side, res)
        v = np.abs(valuefn(pts))
        k = int(np.argmax(v)) if v.size else 0
        if v.size and v[k] > LEAK_TOL:
            where = ", ".join(f"{c:.4g}" for c in pts[k])
            raise SupportLeakError(f"support leak: {what} = {v[k]:.3g} on face {label} at ({where})")


def _outer_faces(dom: Domain):
    faces = []
    for i in range(dom.n):
        if i + 1 in dom.periodic:
            continue
        for side in (0, 1):
            if dom.kind == HALF_SPACE and i == dom.n - 1 and side == 0:
                continue
            faces.append((i, side, f"x{i + 1} = {dom.box[i][side]:g}"))
    return faces


def check_support(form: FormLike, dom: Domain, resolution: int = 32) -> None:
    """Raise :class:`SupportLeakError` if any coefficient is nonzero on an outer face."""
    fs = as_form_sum(form)
    if fs.n != dom.n:
        raise UsageError(f"form lives in R^{fs.n}, domain in R^{dom.n}")
    if not fs.terms:
        return
    for I in itertools.combinations(range(1, fs.n + 1), fs.degree):
        label = "coefficient of d" + "^d".join(f"x{i}" for i in I) if I else "value"
        _scan_faces(lambda P: coefficient_values(fs, I, P), dom.lo, dom.hi, _outer_faces(dom), resolution, label)


def _check_rim(fs, dom: Domain, resolution: int) -> None:
    n = dom.n
    lo, hi = dom.lo[:-1], dom.hi[:-1]
    faces = [(i, s, f"x{i + 1} = {dom.box[i][s]:g}, x{n} = 0")
             for i in range(n - 1) if i + 1 not in dom.periodic for s in (0, 1)]
    tang = tuple(range(1, n))

    def a(P):
        return coefficient_values(fs, tang, np.concatenate([P, np.zeros((P.shape[0], 1))], axis=1))

    _scan_faces(a, lo, hi, faces, resolution, "boundary coefficient")


def _resolution(m):
    return int(min(max(m, 16), 64))


# ------------------------------------------------------------ integrals


def integrate_interior(dform: FormLike, dom: Domain, grid: GridSpec, cells: int | None = None,
                       check: bool = True) -> float:
    """Quadrature of the volume coefficient of a degree-n form over the support box."""
    fs = as_form_sum(dform)
    if fs.n != dom.n:
        raise UsageError(f"form lives in R^{fs.n}, domain in R^{dom.n}")
    if fs.degree != fs.n:
        raise UsageError(f"interior integral needs a degree-{fs.n} form, got degree {fs.degree}")
    if not fs.terms:
        return 0.0
    m = grid.cells if cells is None else cells
    if check:
        check_support(fs, dom, _resolution(m))
    axes = tuple(range(1, fs.n + 1))
    return grid_integral(lambda P: coefficient_values(fs, axes, P), dom.lo, dom.hi, grid, m, form_switches(fs))


def boundary_sign(n: int) -> float:
    return -1.0 if n % 2 else 1.0


def integrate_boundary(form: FormLike, dom: Domain, grid: GridSpec, cells: int | None = None,
                       check: bool = True, flip_sign: bool = False) -> float:
    """Integral of an (n-1)-form over the boundary ``{x_n = 0}`` of the half-space.

    Returns exactly 0.0 on full space.  ``flip_sign`` reverses the
    orientation (a debugging aid for the orientation anchor).
    """
    fs = as_form_sum(form)
    if fs.n != dom.n:
        raise UsageError(f"form lives in R^{fs.n}, domain in R^{dom.n}")
    if fs.degree != fs.n - 1:
        raise UsageError(f"boundary integral needs a degree-{fs.n - 1} form, got degree {fs.degree}")
    if dom.kind == FULL_SPACE or not fs.terms:
        return 0.0
    n = fs.n
    sign = boundary_sign(n) * (-1.0 if flip_sign else 1.0)
    if n == 1:
        return sign * float(coefficient_values(fs, (), np.zeros((1, 1)))[0])
    m = grid.cells if cells is None else cells
    if check:
        _check_rim(fs, dom, _resolution(m))
    tang = tuple(range(1, n))

    def a(P):
        return coefficient_values(fs, tang, np.concatenate([P, np.zeros((P.shape[0], 1))], axis=1))

    switches = form_switches(restrict_to_boundary(fs))
    return sign * grid_integral(a, dom.lo[:-1], dom.hi[:-1], grid, m, switches)


def refine_sequence(op, m0: int, levels: int) -> list[RefinementRow]:
    """Evaluate ``op(m)`` at m, 2m, 4m, ... and record successive differences."""
    if levels < 2:
        raise UsageError("refine_sequence needs at least two levels")
    rows: list[RefinementRow] = []
    for k in range(levels):
        m = m0 * 2**k
        v = float(op(m))
        rows.append(RefinementRow(k, m, v, None if not rows else v - rows[-1].value))
    return rows


def stokes_pair(form: FormLike, dom: Domain, grid: GridSpec, cells: int | None = None,
                flip_sign: bool = False) -> tuple[float, float]:
    """``(boundary integral of form, interior integral of d form)`` on one grid."""
    fs = as_form_sum(form)
    dform = exterior_derivative(fs) if fs.terms else type(fs).zero(fs.n, fs.n)
    return (
        integrate_boundary(fs, dom, grid, cells, flip_sign=flip_sign),
        integrate_interior(dform, dom, grid, cells),
    )
