"""Scenario execution and the built-in suite."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import LipStokesError
from .integrate import HALF_SPACE, stokes_pair
from .manifold import manifold_pair
from .mollify import mollify_form
from .report import LevelRow, MollificationRow, StokesReport, ladder, noise_floor, non_increasing
from .scenario import Scenario, builtin_scenarios

FULL_SPACE_TOL = 1e-6
MOLLIFY_TOL = 5e-3


def _pair_fn(sc: Scenario, flip_sign: bool):
    if sc.atlas is not None:
        return lambda m: manifold_pair(sc.atlas, sc.form, sc.grid, m, flip_sign)
    return lambda m: stokes_pair(sc.form, sc.domain, sc.grid, m, flip_sign)


def mollification_rows(sc: Scenario, flip_sign: bool = False) -> list[MollificationRow]:
    """Integrals of ``omega_s`` and ``d omega_s`` for every width of the schedule."""
    spec = sc.mollification
    reflect = sc.domain.kind == HALF_SPACE
    rows = []
    for s, eps in enumerate(spec.schedule.widths):
        form = mollify_form(sc.form, eps, reflect=reflect)
        b, i = stokes_pair(form, sc.domain, spec.grid, spec.grid.cells, flip_sign)
        rows.append(MollificationRow(s, eps, b, i, b - i))
    return rows


def run_scenario(sc: Scenario, flip_sign: bool = False) -> StokesReport:
    """Refinement ladder (and mollification rows when scheduled) for one scenario."""
    if sc.atlas is not None:
        sc.atlas.validate()
    rows = ladder(_pair_fn(sc, flip_sign), sc.grid.cells, sc.grid.levels)
    report = StokesReport.from_rows(rows, name=sc.name, tolerance=sc.tolerance)
    if sc.mollification is not None:
        report.mollification = mollification_rows(sc, flip_sign)
    return report


def exit_code(report: StokesReport) -> int:
    return 0 if report.passed else 1


# ---------------------------------------------------------------- checks


def mollification_deviation(report: StokesReport) -> tuple[list[float], list[float]]:
    """Per-width deviations of the mollified integrals from the unmollified ones."""
    db = [abs(r.boundary_integral - report.boundary_integral) for r in report.mollification]
    di = [abs(r.interior_integral - report.interior_integral) for r in report.mollification]
    return db, di


def scenario_failures(sc: Scenario, report: StokesReport) -> list[str]:
    """Acceptance checks beyond the residual tolerance; empty when all hold."""
    out = []
    if not report.passed:
        out.append(f"relative residual {report.relative_residual:.3g} > {sc.tolerance:g}")
    ref = sc.reference
    if ref is not None:
        if ref.boundary is not None and abs(report.boundary_integral - ref.boundary) > ref.tol:
            out.append(f"boundary {report.boundary_integral:.12g} misses reference {ref.boundary:.12g}")
        if ref.interior is not None and abs(report.interior_integral - ref.interior) > ref.tol:
            out.append(f"interior {report.interior_integral:.12g} misses reference {ref.interior:.12g}")
    if sc.atlas is None and sc.domain.kind != HALF_SPACE:
        if any(r.boundary_integral != 0.0 for r in report.rows):
            out.append("full-space boundary integral is not exactly 0")
        if abs(report.interior_integral) > FULL_SPACE_TOL:
            out.append(f"full-space interior {report.interior_integral:.3g} exceeds {FULL_SPACE_TOL:g}")
    if len(report.rows) >= 3 and not non_increasing(report.residuals(), noise_floor(report.interior_integral)):
        out.append("residuals increase over the last three levels")
    if report.mollification:
        for label, dev in zip(("boundary", "interior"), mollification_deviation(report)):
            if dev[-1] > MOLLIFY_TOL:
                out.append(f"mollified {label} deviates by {dev[-1]:.3g} at the last width")
            if not non_increasing(dev, noise_floor(report.interior_integral), last=4):
                out.append(f"mollified {label} deviations are not monotone")
    return out


@dataclass
class SuiteResult:
    name: str
    setting: str
    report: StokesReport | None
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0
    exit_code: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def run_one(sc: Scenario, flip_sign: bool = False) -> SuiteResult:
    t0 = time.perf_counter()
    try:
        report = run_scenario(sc, flip_sign)
    except LipStokesError as exc:
        return SuiteResult(sc.name, sc.setting, None, [str(exc)], time.perf_counter() - t0, exc.exit_code)
    failures = scenario_failures(sc, report)
    return SuiteResult(sc.name, sc.setting, report, failures, time.perf_counter() - t0, 1 if failures else 0)


def run_suite(name_filter: str | None = None, flip_sign: bool = False, scenarios=None) -> list[SuiteResult]:
    """Run built-in scenarios whose name contains ``name_filter``, in name order."""
    scenarios = builtin_scenarios() if scenarios is None else scenarios
    chosen = [s for s in scenarios if name_filter is None or name_filter in s.name]
    return [run_one(s, flip_sign) for s in chosen]


def suite_exit_code(results: list[SuiteResult]) -> int:
    codes = [r.exit_code for r in results if r.exit_code]
    return max(codes) if codes else 0


def format_table(results: list[SuiteResult]) -> str:
    head = f"{'scenario':<24} {'setting':<10} {'boundary':>16} {'interior':>16} {'rel.resid':>10} {'time':>7}  status"
    lines = [head, "-" * len(head)]
    for r in results:
        if r.report is None:
            lines.append(f"{r.name:<24} {r.setting:<10} {'-':>16} {'-':>16} {'-':>10} {r.seconds:>6.2f}s  ERROR")
        else:
            rep = r.report
            lines.append(
                f"{r.name:<24} {r.setting:<10} {rep.boundary_integral:>16.10f} {rep.interior_integral:>16.10f} "
                f"{rep.relative_residual:>10.2e} {r.seconds:>6.2f}s  {'pass' if r.passed else 'FAIL'}"
            )
        for msg in r.failures:
            lines.append(f"    - {msg}")
    return "\n".join(lines)


def level_table(rows: list[LevelRow]) -> str:
    lines = [f"{'level':>5} {'m':>5} {'boundary':>20} {'interior':>20} {'residual':>12}"]
    for r in rows:
        lines.append(
            f"{r.level:>5} {r.m:>5} {r.boundary_integral:>20.14f} {r.interior_integral:>20.14f} {r.residual:>12.3e}"
        )
    return "\n".join(lines)


def mollification_table(rows: list[MollificationRow]) -> str:
    lines = [f"{'s':>3} {'eps':>10} {'boundary_s':>20} {'interior_s':>20} {'residual':>12}"]
    for r in rows:
        lines.append(
            f"{r.s:>3} {r.eps:>10.6f} {r.boundary_integral:>20.14f} {r.interior_integral:>20.14f} {r.residual:>12.3e}"
        )
    return "\n".join(lines)
