"""Stokes reports: per-level refinement rows, mollification rows, CSV/JSON output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

CSV_COLUMNS = ("level", "m", "boundary_integral", "interior_integral", "residual")
MOLLIFY_COLUMNS = ("s", "eps", "boundary_integral", "interior_integral", "residual")


@dataclass
class LevelRow:
    level: int
    m: int
    boundary_integral: float
    interior_integral: float
    residual: float


@dataclass
class MollificationRow:
    s: int
    eps: float
    boundary_integral: float
    interior_integral: float
    residual: float


@dataclass
class StokesReport:
    """Boundary and interior integrals at the finest level plus the full ladder."""

    boundary_integral: float
    interior_integral: float
    residual: float
    relative_residual: float
    rows: list[LevelRow] = field(default_factory=list)
    mollification: list[MollificationRow] = field(default_factory=list)
    name: str = ""
    tolerance: float | None = None

    @classmethod
    def from_rows(cls, rows: list[LevelRow], **extra) -> StokesReport:
        last = rows[-1]
        return cls(
            last.boundary_integral,
            last.interior_integral,
            last.residual,
            relative_residual(last.boundary_integral, last.interior_integral),
            rows,
            **extra,
        )

    @property
    def passed(self) -> bool:
        return self.tolerance is None or self.relative_residual <= self.tolerance

    def residuals(self) -> list[float]:
        return [r.residual for r in self.rows]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([r.level, r.m, repr(r.boundary_integral), repr(r.interior_integral), repr(r.residual)])

    def mollification_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(MOLLIFY_COLUMNS)
            for r in self.mollification:
                w.writerow([r.s, repr(r.eps), repr(r.boundary_integral), repr(r.interior_integral), repr(r.residual)])


def relative_residual(boundary: float, interior: float) -> float:
    return abs(boundary - interior) / (1.0 + abs(interior))


def ladder(pair: Callable[[int], tuple[float, float]], m0: int, levels: int) -> list[LevelRow]:
    """Evaluate ``pair(m) -> (boundary, interior)`` at m0, 2 m0, ..."""
    rows = []
    for k in range(levels):
        m = m0 * 2**k
        b, i = pair(m)
        rows.append(LevelRow(k, m, float(b), float(i), float(b) - float(i)))
    return rows


def non_increasing(values, floor: float = 0.0, last: int = 3) -> bool:
    """``|v_{k+1}| <= |v_k| + floor`` over the trailing ``last`` entries."""
    tail = [abs(v) for v in values[-last:]]
    return all(b <= a + floor for a, b in zip(tail, tail[1:]))


def noise_floor(scale: float) -> float:
    """Rounding-level allowance for comparisons of integrals of size ``scale``."""
    return 1e-12 * (1.0 + abs(scale))


def finite(x: float) -> bool:
    return math.isfinite(x)
