"""Scenario files: schema, loading and validation.

A scenario is a YAML mapping (``schema_version: 1``)::

    name: h2-anchor
    dimension: 2
    form:                       # list of simple terms, summed
      - coefficient: "bump(x1, 0, 1) * max(0, 1 - x2)"
        factors: ["x1"]
        lip: 2.0                # optional declared Lipschitz bound
    domain: {kind: half-space, box: [[-2, 2], [0, 2]]}
    grid: {cells: 32, rule: "gauss(4)", levels: 4}
    tolerance: 1.0e-3
    reference: {boundary: 0.9142857142857143, interior: 0.9142857142857143, tol: 1.0e-6}
    mollification: {eps0: 0.5, ratio: 0.5, count: 8, cells: 8, rule: "gauss(5)"}

Atlas scenarios replace ``domain`` by ``atlas`` (charts with forward and
inverse components, a target domain and a bump each).  Numbers may be
written as constant expressions (``pi``, ``2*pi``).  An empty ``form`` list
needs an explicit ``degree``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import yaml

from . import nodes as nd
from .errors import ConfigError, LipStokesError, ParseError
from .expr import parse_field, parse_node
from .fields import ScalarField
from .forms import FormSum, SimpleForm
from .integrate import Domain, GridSpec
from .manifold import Atlas, Chart
from .mollify import MollificationSchedule

SCHEMA_VERSION = 1
DEFAULT_TOLERANCE = {"flat": 1e-3, "atlas": 1e-2}
_RULE = re.compile(r"^\s*(midpoint|gauss)\s*(?:\(\s*(\d+)\s*\))?\s*$")
_TOP_KEYS = {
    "schema_version", "name", "description", "dimension", "degree", "form", "domain", "atlas",
    "grid", "tolerance", "reference", "mollification", "tags",
}


@dataclass(frozen=True)
class Reference:
    """Expected integral values for a scenario, with an absolute tolerance."""

    boundary: float | None = None
    interior: float | None = None
    tol: float = 1e-6


@dataclass(frozen=True)
class MollifySpec:
    schedule: MollificationSchedule
    grid: GridSpec


@dataclass(frozen=True)
class Scenario:
    name: str
    dimension: int
    form: FormSum
    grid: GridSpec
    tolerance: float
    domain: Domain | None = None
    atlas: Atlas | None = None
    mollification: MollifySpec | None = None
    reference: Reference | None = None
    description: str = ""
    tags: tuple[str, ...] = ()
    source: str = ""

    @property
    def kind(self) -> str:
        return "atlas" if self.atlas is not None else "flat"

    @property
    def setting(self) -> str:
        if self.atlas is not None:
            return f"atlas({len(self.atlas.charts)})"
        return ("H" if self.domain.kind == "half-space" else "R") + str(self.dimension)

    def with_grid(self, cells: int | None = None, levels: int | None = None, seed: int | None = None) -> Scenario:
        g = self.grid
        g = replace(
            g,
            cells=g.cells if cells is None else cells,
            levels=g.levels if levels is None else levels,
            seed=g.seed if seed is None else seed,
        )
        return replace(self, grid=g)


# ------------------------------------------------------------ helpers


class _Ctx:
    def __init__(self, name: str):
        self.name = name

    def fail(self, where: str, msg: str, kind: type[ConfigError] = ConfigError):
        raise kind(f"scenario {self.name!r}: {where}: {msg}")

    def number(self, value, where: str) -> float:
        if isinstance(value, bool):
            self.fail(where, "expected a number")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
            try:
                node = parse_node(value, 1)
            except LipStokesError as exc:
                self.fail(where, str(exc))
            if not isinstance(node, nd.Const):
                self.fail(where, f"{value!r} is not a constant")
            return node.c
        self.fail(where, f"expected a number, got {type(value).__name__}")

    def integer(self, value, where: str, minimum: int) -> int:
        v = self.number(value, where)
        if v != int(v) or v < minimum:
            self.fail(where, f"expected an integer >= {minimum}, got {value!r}")
        return int(v)

    def field(self, text, arity: int, where: str, lip=None) -> ScalarField:
        if not isinstance(text, (str, int, float)) or isinstance(text, bool):
            self.fail(where, "expected an expression string")
        try:
            return parse_field(str(text), arity, lip)
        except LipStokesError as exc:
            self.fail(where, str(exc), ParseError if isinstance(exc, ParseError) else ConfigError)

    def mapping(self, value, where: str, allowed: set[str]) -> dict:
        if not isinstance(value, dict):
            self.fail(where, "expected a mapping")
        extra = set(value) - allowed
        if extra:
            self.fail(where, f"unknown keys {sorted(extra)}")
        return value


def parse_rule(text: str) -> tuple[str, int]:
    """``"midpoint"`` or ``"gauss(k)"`` -> ``(rule, order)``."""
    m = _RULE.match(str(text))
    if not m:
        raise ConfigError(f"unknown quadrature rule {text!r}; use 'midpoint' or 'gauss(k)'")
    rule, order = m.group(1), m.group(2)
    if rule == "midpoint":
        if order is not None:
            raise ConfigError("midpoint takes no order")
        return rule, 1
    return rule, int(order) if order else 4


def _grid(ctx: _Ctx, raw, where: str, default_levels: int = 4) -> GridSpec:
    raw = ctx.mapping(raw or {}, where, {"cells", "rule", "levels", "jitter", "seed"})
    rule, order = parse_rule(raw.get("rule", "midpoint"))
    try:
        return GridSpec(
            cells=ctx.integer(raw.get("cells", 32), f"{where}.cells", 2),
            rule=rule,
            order=order,
            levels=ctx.integer(raw.get("levels", default_levels), f"{where}.levels", 1),
            jitter=ctx.number(raw.get("jitter", 0.0), f"{where}.jitter"),
            seed=ctx.integer(raw.get("seed", 0), f"{where}.seed", 0),
        )
    except ConfigError as exc:
        ctx.fail(where, str(exc))


def _domain(ctx: _Ctx, raw, where: str, n: int) -> Domain:
    raw = ctx.mapping(raw, where, {"kind", "box", "periodic"})
    box = raw.get("box")
    if not isinstance(box, list) or len(box) != n:
        ctx.fail(f"{where}.box", f"expected {n} [lo, hi] pairs")
    pairs = []
    for i, b in enumerate(box):
        if not isinstance(b, list) or len(b) != 2:
            ctx.fail(f"{where}.box[{i}]", "expected [lo, hi]")
        pairs.append((ctx.number(b[0], f"{where}.box[{i}][0]"), ctx.number(b[1], f"{where}.box[{i}][1]")))
    periodic = raw.get("periodic", [])
    if not isinstance(periodic, list):
        ctx.fail(f"{where}.periodic", "expected a list of axes")
    try:
        return Domain(str(raw.get("kind", "")), tuple(pairs), tuple(ctx.integer(p, f"{where}.periodic", 1) for p in periodic))
    except ConfigError as exc:
        ctx.fail(where, str(exc))


def _form(ctx: _Ctx, raw, n: int, degree) -> FormSum:
    if not isinstance(raw, list):
        ctx.fail("form", "expected a list of terms")
    terms = []
    for k, t in enumerate(raw):
        where = f"form[{k}]"
        t = ctx.mapping(t, where, {"coefficient", "factors", "lip"})
        if "coefficient" not in t:
            ctx.fail(where, "missing 'coefficient'")
        lip = None if t.get("lip") is None else ctx.number(t["lip"], f"{where}.lip")
        coef = ctx.field(t["coefficient"], n, f"{where}.coefficient", lip)
        factors = t.get("factors", [])
        if not isinstance(factors, list):
            ctx.fail(f"{where}.factors", "expected a list")
        gs = tuple(ctx.field(g, n, f"{where}.factors[{j}]") for j, g in enumerate(factors))
        terms.append(SimpleForm(coef, gs, n))
    degrees = {t.degree for t in terms}
    if degree is not None:
        degree = ctx.integer(degree, "degree", 0)
        degrees.add(degree)
    if not degrees:
        ctx.fail("form", "an empty form needs an explicit 'degree'")
    if len(degrees) > 1:
        ctx.fail("form", f"terms have mixed degrees {sorted(degrees)}")
    deg = degrees.pop()
    if deg != n - 1:
        ctx.fail("form", f"Stokes scenarios need a degree-{n - 1} form, got degree {deg}")
    return FormSum(tuple(terms), n, deg)


def _atlas(ctx: _Ctx, raw, n: int) -> Atlas:
    raw = ctx.mapping(raw, "atlas", {"charts", "support_box", "region", "normalize"})
    charts_raw = raw.get("charts")
    if not isinstance(charts_raw, list) or not charts_raw:
        ctx.fail("atlas.charts", "expected a nonempty list")
    charts, bumps = [], []
    for k, c in enumerate(charts_raw):
        where = f"atlas.charts[{k}]"
        c = ctx.mapping(c, where, {"label", "forward", "inverse", "target", "bump"})
        for key in ("forward", "inverse"):
            if not isinstance(c.get(key), list) or len(c[key]) != n:
                ctx.fail(f"{where}.{key}", f"expected {n} expressions")
        target = _domain(ctx, c.get("target"), f"{where}.target", n)
        period = {p: target.box[p - 1][1] - target.box[p - 1][0] for p in target.periodic}
        try:
            charts.append(Chart(
                str(c.get("label", f"chart{k}")),
                tuple(ctx.field(e, n, f"{where}.forward[{j}]") for j, e in enumerate(c["forward"])),
                tuple(ctx.field(e, n, f"{where}.inverse[{j}]") for j, e in enumerate(c["inverse"])),
                target,
                period,
            ))
        except ConfigError as exc:
            ctx.fail(where, str(exc))
        bumps.append(ctx.field(c.get("bump", "1"), n, f"{where}.bump"))
    box = raw.get("support_box")
    if not isinstance(box, list) or len(box) != n:
        ctx.fail("atlas.support_box", f"expected {n} [lo, hi] pairs")
    sbox = tuple(
        (ctx.number(b[0], f"atlas.support_box[{i}]"), ctx.number(b[1], f"atlas.support_box[{i}]"))
        for i, b in enumerate(box)
    )
    region = None if raw.get("region") is None else ctx.field(raw["region"], n, "atlas.region")
    if raw.get("normalize", True):
        return Atlas.normalized(charts, bumps, sbox, region)
    return Atlas(tuple(charts), tuple(bumps), sbox, region)


def _reference(ctx: _Ctx, raw) -> Reference | None:
    if raw is None:
        return None
    raw = ctx.mapping(raw, "reference", {"boundary", "interior", "tol"})
    get = lambda k: None if raw.get(k) is None else ctx.number(raw[k], f"reference.{k}")  # noqa: E731
    return Reference(get("boundary"), get("interior"), get("tol") or 1e-6)


def scenario_from_dict(raw: dict, source: str = "") -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source or 'scenario'}: top level must be a mapping")
    name = str(raw.get("name") or Path(source).stem or "unnamed")
    ctx = _Ctx(name)
    extra = set(raw) - _TOP_KEYS
    if extra:
        ctx.fail("top level", f"unknown keys {sorted(extra)}")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        ctx.fail("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    n = ctx.integer(raw.get("dimension"), "dimension", 1)
    form = _form(ctx, raw.get("form", []), n, raw.get("degree"))
    if ("domain" in raw) == ("atlas" in raw):
        ctx.fail("top level", "give exactly one of 'domain' or 'atlas'")
    domain = _domain(ctx, raw["domain"], "domain", n) if "domain" in raw else None
    atlas = _atlas(ctx, raw["atlas"], n) if "atlas" in raw else None
    kind = "atlas" if atlas is not None else "flat"
    grid = _grid(ctx, raw.get("grid"), "grid")
    tol = ctx.number(raw.get("tolerance", DEFAULT_TOLERANCE[kind]), "tolerance")
    moll = None
    if raw.get("mollification") is not None:
        if atlas is not None:
            ctx.fail("mollification", "only supported for flat scenarios")
        m = ctx.mapping(raw["mollification"], "mollification", {"eps0", "ratio", "count", "cells", "rule"})
        try:
            sched = MollificationSchedule(
                ctx.number(m.get("eps0"), "mollification.eps0"),
                ctx.number(m.get("ratio"), "mollification.ratio"),
                ctx.integer(m.get("count"), "mollification.count", 1),
            )
        except LipStokesError as exc:
            ctx.fail("mollification", str(exc))
        mgrid = _grid(ctx, {k: m[k] for k in ("cells", "rule") if k in m}, "mollification", 1)
        moll = MollifySpec(sched, mgrid)
    tags = raw.get("tags", [])
    if not isinstance(tags, list):
        ctx.fail("tags", "expected a list")
    return Scenario(
        name=name,
        dimension=n,
        form=form,
        grid=grid,
        tolerance=tol,
        domain=domain,
        atlas=atlas,
        mollification=moll,
        reference=_reference(ctx, raw.get("reference")),
        description=str(raw.get("description", "")).strip(),
        tags=tuple(str(t) for t in tags),
        source=source,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return loads_scenario(text, str(path))


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from None
    return scenario_from_dict(raw, source)


def builtin_paths() -> list[Path]:
    root = resources.files("lipstokes") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml"))


def builtin_scenarios() -> list[Scenario]:
    return [load_scenario(p) for p in builtin_paths()]


def find_builtin(name: str) -> Path | None:
    for p in builtin_paths():
        if p.stem == name:
            return p
    return None
