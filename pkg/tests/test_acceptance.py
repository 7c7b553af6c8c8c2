"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import time

import numpy as np
import pytest
from scipy import integrate

from conftest import record
from lipstokes.catalog import FIELD_CATALOG
from lipstokes.expr import parse_field
from lipstokes.fields import SamplePlan, lipschitz_estimate
from lipstokes.forms import SimpleForm
from lipstokes.integrate import FULL_SPACE, HALF_SPACE
from lipstokes.manifold import naturality_gap
from lipstokes.mollify import MollificationSchedule, convergence_probe, steklov_average, steklov_partial
from lipstokes.report import noise_floor, non_increasing
from lipstokes.runner import mollification_deviation, run_scenario, run_suite
from lipstokes.scenario import builtin_scenarios, find_builtin, load_scenario

SCHEDULE = MollificationSchedule(0.5, 0.5, 8)
FINEST = {2: 256, 3: 64}


@pytest.fixture(scope="session")
def suite():
    t0 = time.perf_counter()
    results = run_suite()
    return {r.name: r for r in results}, time.perf_counter() - t0


@pytest.fixture(scope="session")
def scenarios():
    return {s.name: s for s in builtin_scenarios()}


def beta_integral():
    return integrate.quad(lambda t: (1 - t * t) ** 3, -1, 1, epsabs=1e-15)[0]


def test_criterion_1_flat_suite(suite, scenarios):
    results, seconds = suite
    flat = [s for s in scenarios.values() if s.domain is not None and s.domain.kind == HALF_SPACE]
    problems = []
    for s in flat:
        rep = results[s.name].report
        if rep is None:
            problems.append(f"{s.name}: {results[s.name].failures}")
            continue
        if rep.relative_residual > 1e-3:
            problems.append(f"{s.name}: residual {rep.relative_residual:.2e}")
        if not non_increasing(rep.residuals(), noise_floor(rep.interior_integral)):
            problems.append(f"{s.name}: residuals increase")
        want = FINEST.get(s.dimension)
        if want is not None and rep.rows[-1].m != want:
            problems.append(f"{s.name}: finest m {rep.rows[-1].m} != {want}")
    dims = {s.dimension for s in flat}
    smooth = any("smooth" in s.tags for s in flat)
    kinked = any("kinked" in s.tags for s in flat)
    ok = len(flat) >= 6 and dims == {1, 2, 3} and smooth and kinked and not problems and seconds <= 60
    worst = max(results[s.name].report.relative_residual for s in flat if results[s.name].report)
    record(1, ok, f"{len(flat)} half-space scenarios, worst residual {worst:.2e}, suite {seconds:.1f}s {problems}")
    assert ok


def test_criterion_2_exact_forms(suite, scenarios):
    results, _ = suite
    full = [s for s in scenarios.values() if s.domain is not None and s.domain.kind == FULL_SPACE]
    worst = 0.0
    ok = len(full) >= 1
    for s in full:
        rep = results[s.name].report
        ok &= rep is not None and all(r.boundary_integral == 0.0 for r in rep.rows)
        worst = max(worst, abs(rep.interior_integral))
    ok &= worst <= 1e-6
    record(2, ok, f"{len(full)} full-space scenarios, boundary exactly 0, max |interior| {worst:.2e}")
    assert ok


def test_criterion_3_commutation():
    worst = 0.0
    for c in FIELD_CATALOG:
        f = c.field()
        X = SamplePlan(c.box, 100, 1).points()
        for eps in (0.5, 0.1, 0.02):
            avg = steklov_average(f, eps)
            h = 1e-4 * eps
            for j in range(1, c.arity + 1):
                E = np.zeros(c.arity)
                E[j - 1] = h
                fd = (avg.eval(X + E) - avg.eval(X - E)) / (2 * h)
                worst = max(worst, float(np.max(np.abs(steklov_partial(f, eps, j).eval(X) - fd))))
    ok = worst <= 1e-6
    record(3, ok, f"{len(FIELD_CATALOG)} fields, max |partial - central difference| {worst:.2e}")
    assert ok


def test_criterion_4_contraction_and_bound():
    worst_ratio, worst_sup = 0.0, 0.0
    for c in FIELD_CATALOG:
        f = c.field()
        plan = SamplePlan(c.box, 200, 2)
        base = lipschitz_estimate(f, plan)
        for eps in SCHEDULE.widths:
            worst_ratio = max(worst_ratio, lipschitz_estimate(steklov_average(f, eps), plan) / base)
            X = SamplePlan(c.inner_box(eps / 2), 200, 3).points()
            for j in range(1, c.arity + 1):
                sup = float(np.max(np.abs(steklov_partial(f, eps, j).eval(X))))
                worst_sup = max(worst_sup, sup / c.lip)
    ok = worst_ratio <= 1 + 1e-6 and worst_sup <= 1 + 1e-9
    record(4, ok, f"max Lip ratio {worst_ratio:.8f}, max sup|partial| / bound {worst_sup:.6f}")
    assert ok


def test_criterion_5_ae_convergence():
    lows = {}
    for c in FIELD_CATALOG:
        plan = SamplePlan(c.box, 200, 4)
        f = c.field()
        k = convergence_probe(f, SCHEDULE, plan, 1e-3).min_fraction
        kb = convergence_probe(f, SCHEDULE, plan.boundary_slice(), 1e-3).min_fraction
        lows[c.name] = (k, kb)
    worst_k = min(v[0] for v in lows.values())
    worst_kb = min(v[1] for v in lows.values())
    ok = worst_k >= 0.99 and worst_kb >= 0.99
    record(5, ok, f"min fraction on K {worst_k:.3f}, on K' {worst_kb:.3f}")
    assert ok


def test_criterion_6_limit_sequences(suite):
    results, _ = suite
    lines, ok = [], True
    for name in ("h2-kinked", "h2-anchor-mollified"):
        rep = results[name].report
        db, di = mollification_deviation(rep)
        for label, dev in (("boundary", db), ("interior", di)):
            tail = dev[-4:]
            mono = all(b <= a for a, b in zip(tail, tail[1:]))
            ok &= dev[-1] <= 5e-3 and mono
            lines.append(f"{name} {label} {dev[-1]:.1e}{'' if mono else ' (not monotone)'}")
    record(6, ok, "final deviations: " + ", ".join(lines))
    assert ok


def test_criterion_7_naturality(scenarios):
    smooth_forms = [("x1", ["x2"]), ("bump(0, 1) * sin(x1)", ["x1 * x2"])]
    kinked_forms = [("abs(x1 - 0.1)", ["x2"]), ("max(0, 1 - abs(x1) - abs(x2))", ["min(x1, 2*x2)"])]
    worst = {True: 0.0, False: 0.0}
    for s in scenarios.values():
        if s.atlas is None:
            continue
        for chart in s.atlas.charts:
            box = tuple((a + 0.05 * (b - a), b - 0.05 * (b - a)) for a, b in chart.target.box)
            Y = SamplePlan(box, 50, 5).points()
            for smooth, catalog in ((True, smooth_forms), (False, kinked_forms)):
                for coef, facs in catalog:
                    w = SimpleForm(parse_field(coef, 2), tuple(parse_field(g, 2) for g in facs), 2)
                    worst[smooth] = max(worst[smooth], naturality_gap(chart, w, Y))
            for term in s.form.terms:
                worst[s.name == "disk-atlas"] = max(worst[s.name == "disk-atlas"], naturality_gap(chart, term, Y))
    ok = worst[True] <= 1e-8 and worst[False] <= 1e-5
    record(7, ok, f"max gap smooth {worst[True]:.1e}, Lipschitz {worst[False]:.1e}")
    assert ok


def test_criterion_8_atlas(suite, scenarios):
    results, _ = suite
    disk = results["disk-atlas"].report
    flat = results["h2-anchor"].report
    single = results["h2-anchor-atlas"].report
    same = [(r.boundary_integral, r.interior_integral) for r in flat.rows] == [
        (r.boundary_integral, r.interior_integral) for r in single.rows
    ]
    defect = max(s.atlas.partition_defect(4000, 6)[0] for s in scenarios.values() if s.atlas is not None)
    ok = (
        disk.relative_residual <= 1e-2
        and abs(disk.boundary_integral - np.pi) <= 1e-2
        and abs(disk.interior_integral - np.pi) <= 1e-2
        and same
        and defect <= 1e-12
    )
    record(8, ok, f"disk {disk.boundary_integral:.10f} / {disk.interior_integral:.10f}, "
                  f"identity atlas bit-identical {same}, max |sum rho - 1| {defect:.1e}")
    assert ok


def test_criterion_9_orientation_anchor(suite):
    results, _ = suite
    rep = results["h2-anchor"].report
    oracle = beta_integral()
    flipped = run_scenario(load_scenario(find_builtin("h2-anchor")), flip_sign=True)
    ok = (
        abs(rep.boundary_integral - oracle) <= 1e-6
        and abs(rep.interior_integral - oracle) <= 1e-6
        and not flipped.passed
    )
    record(9, ok, f"boundary {rep.boundary_integral:.12f}, interior {rep.interior_integral:.12f}, "
                  f"oracle {oracle:.12f}, flipped residual {flipped.relative_residual:.3f}")
    assert ok


def test_suite_all_pass(suite):
    results, _ = suite
    failing = {k: r.failures for k, r in results.items() if not r.passed}
    assert not failing
