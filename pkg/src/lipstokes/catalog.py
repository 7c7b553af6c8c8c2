"""Reference fields used by the property checks and the acceptance tests.

Each entry carries a box ``K`` (its last axis starts at or below 0, so the
slice ``x_n = 0`` is part of it) and a Lipschitz bound for the Euclidean
norm, valid on ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import parse_field
from .fields import ScalarField


@dataclass(frozen=True)
class CatalogField:
    name: str
    expr: str
    arity: int
    box: tuple[tuple[float, float], ...]
    lip: float
    smooth: bool

    def field(self) -> ScalarField:
        return parse_field(self.expr, self.arity, self.lip)

    def inner_box(self, margin: float) -> tuple[tuple[float, float], ...]:
        """``K`` shrunk by ``margin`` on every side (cubes of half-width ``margin`` stay in ``K``)."""
        return tuple((a + margin, b - margin) for a, b in self.box)


FIELD_CATALOG: tuple[CatalogField, ...] = (
    CatalogField("half-square", "x1^2 / 2", 1, ((-1.0, 1.0),), 1.0, True),
    CatalogField("abs", "abs(x1)", 1, ((-1.0, 1.0),), 1.0, False),
    CatalogField("hat", "max(0, 1 - abs(x1 - 0.3))", 1, ((-1.0, 1.5),), 1.0, False),
    CatalogField("max", "max(x1, x2)", 2, ((-1.0, 1.0), (-1.0, 1.0)), 1.0, False),
    CatalogField("min-scaled", "min(x1, 2*x2)", 2, ((-1.0, 1.0), (-1.0, 1.0)), 2.0, False),
    CatalogField("anchor", "bump(x1, 0, 1) * max(0, 1 - x2)", 2, ((-2.0, 2.0), (0.0, 2.0)), 2.0, False),
    CatalogField("bump2", "bump(0, 1)", 2, ((-1.5, 1.5), (-1.5, 1.5)), 2.5, True),
    CatalogField("sin-cos", "sin(x1) * cos(x2)", 2, ((-2.0, 2.0), (-2.0, 2.0)), 1.0, True),
    CatalogField(
        "pyramid3", "max(0, 1 - abs(x1) - abs(x2) - x3)", 3, ((-1.5, 1.5), (-1.5, 1.5), (0.0, 1.5)), 1.75, False
    ),
    CatalogField("triple", "x1 * x2 * x3", 3, ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), 1.75, True),
)


def catalog_field(name: str) -> CatalogField:
    for c in FIELD_CATALOG:
        if c.name == name:
            return c
    raise KeyError(name)
