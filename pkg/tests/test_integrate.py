import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from lipstokes.errors import ConfigError, SupportLeakError, UsageError
from lipstokes.expr import parse_field
from lipstokes.forms import FormSum, SimpleForm, exterior_derivative
from lipstokes.integrate import (
    FULL_SPACE,
    HALF_SPACE,
    Domain,
    GridSpec,
    boundary_sign,
    check_support,
    integrate_boundary,
    integrate_interior,
    refine_sequence,
    stokes_pair,
)


def form(coef, factors, n):
    return SimpleForm(parse_field(coef, n), tuple(parse_field(g, n) for g in factors), n)


def beta_integral():
    """Independent 1-D oracle for the integral of the bump profile (1 - t^2)^3 on [-1, 1]."""
    return integrate.quad(lambda t: (1 - t * t) ** 3, -1, 1, epsabs=1e-15)[0]


ANCHOR = form("bump(x1, 0, 1) * max(0, 1 - x2)", ["x1"], 2)
H2 = Domain(HALF_SPACE, ((-2, 2), (0, 2)))
GAUSS = GridSpec(32, "gauss", 4)


# ---------------------------------------------------------------- Domain / GridSpec


@pytest.mark.parametrize(
    "kind, box, periodic",
    [
        ("sphere", ((0, 1),), ()),
        (FULL_SPACE, (), ()),
        (FULL_SPACE, ((0, 1),) * 5, ()),
        (FULL_SPACE, ((0, 1), (2, 2)), ()),
        (HALF_SPACE, ((0, 1), (0.5, 1)), ()),
        (HALF_SPACE, ((0, 1), (0, 1)), (2,)),
        (FULL_SPACE, ((0, 1), (0, 1)), (3,)),
    ],
)
def test_domain_rejects(kind, box, periodic):
    with pytest.raises(ConfigError):
        Domain(kind, box, periodic)


@pytest.mark.parametrize("kw", [{"cells": 1}, {"rule": "simpson"}, {"order": 0}, {"levels": 0}, {"jitter": 0.5}])
def test_gridspec_rejects(kw):
    with pytest.raises(ConfigError):
        GridSpec(**kw)


def test_gridspec_ladder():
    g = GridSpec(8, levels=4)
    assert [g.cells_at(k) for k in range(4)] == [8, 16, 32, 64] and g.finest == 64


# ---------------------------------------------------------------- integrate_interior


def test_interior_zero_coefficient():  # [TRIVIAL]
    d = exterior_derivative(form("x2", ["x2"], 2))
    assert integrate_interior(d, H2, GridSpec(8), check=False) == 0.0


@pytest.mark.parametrize("grid", [GridSpec(64), GridSpec(16, "gauss", 4)])
def test_interior_exact_form_full_space(grid):  # [TRIVIAL]
    d = exterior_derivative(form("bump(0, 1)", ["x1"], 2))
    assert abs(integrate_interior(d, Domain(FULL_SPACE, ((-2, 2), (-2, 2))), grid)) <= 1e-12


def test_interior_anchor():  # [DERIVED] 1-D quadrature oracle for the bump integral
    assert integrate_interior(exterior_derivative(ANCHOR), H2, GAUSS) == pytest.approx(beta_integral(), abs=1e-13)


def test_interior_anchor_midpoint():
    v = integrate_interior(exterior_derivative(ANCHOR), H2, GridSpec(256))
    assert abs(v - beta_integral()) <= 1e-3 * (1 + abs(v))


def test_interior_degree_mismatch():
    with pytest.raises(UsageError):
        integrate_interior(ANCHOR, H2, GAUSS)


def test_interior_support_leak():
    d = exterior_derivative(form("bump(0, 1)", ["x1"], 2))
    with pytest.raises(SupportLeakError, match="x1 = -0.5"):
        integrate_interior(d, Domain(FULL_SPACE, ((-0.5, 2), (-2, 2))), GAUSS)


def test_check_support_names_coefficient():
    with pytest.raises(SupportLeakError, match="coefficient of dx1"):
        check_support(form("1", ["x1"], 2), Domain(FULL_SPACE, ((-1, 1), (-1, 1))))


# ---------------------------------------------------------------- integrate_boundary


def test_boundary_full_space():  # [TRIVIAL]
    assert integrate_boundary(form("x1 + 5", ["x2"], 2), Domain(FULL_SPACE, ((-1, 1), (-1, 1))), GAUSS) == 0.0


def test_boundary_anchor():  # [DERIVED] same oracle; sign +1 for n = 2
    assert integrate_boundary(ANCHOR, H2, GAUSS) == pytest.approx(beta_integral(), abs=1e-13)


def test_boundary_vanishing_restriction():  # [TRIVIAL]
    w = form("x2 * bump(x1, 0, 1)", ["x1"], 2)
    assert integrate_boundary(w, H2, GAUSS) == 0.0


def test_boundary_h1_point_evaluation():
    w = form("max(0, 0.7 - x1)", [], 1)
    assert integrate_boundary(w, Domain(HALF_SPACE, ((0, 2),)), GAUSS) == -0.7


def test_boundary_rim_leak():
    w = form("max(0, 1 - x2)", ["x1"], 2)
    with pytest.raises(SupportLeakError, match="boundary coefficient"):
        integrate_boundary(w, Domain(HALF_SPACE, ((-1, 1), (0, 2))), GAUSS)


def test_boundary_sign():
    assert [boundary_sign(n) for n in (1, 2, 3, 4)] == [-1.0, 1.0, -1.0, 1.0]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_stokes_half_space_each_dimension(n):
    coef = {1: "bump(x1, 0, 1)", 2: "bump(0, 1) * (1 + x1)", 3: "bump(0, 1) * (2 + x2)"}[n]
    factors = {1: [], 2: ["x1 + x2^2"], 3: ["x1", "x2 + x3"]}[n]
    dom = Domain(HALF_SPACE, ((-1.5, 1.5),) * (n - 1) + ((0, 1.5),))
    b, i = stokes_pair(form(coef, factors, n), dom, GridSpec(8, "gauss", 4))
    assert b != 0.0
    assert b == pytest.approx(i, abs=1e-12)


def test_flip_sign():
    assert integrate_boundary(ANCHOR, H2, GAUSS, flip_sign=True) == -integrate_boundary(ANCHOR, H2, GAUSS)


# ---------------------------------------------------------------- refine_sequence


def test_refine_constant():  # [TRIVIAL]
    dom = Domain(FULL_SPACE, ((-1, 1), (-0.5, 0.5)))
    d = exterior_derivative(form("x1", ["x2"], 2))
    rows = refine_sequence(lambda m: integrate_interior(d, dom, GridSpec(m), check=False), 4, 4)
    assert [r.m for r in rows] == [4, 8, 16, 32]
    assert all(abs(r.value - 2.0) <= 1e-14 for r in rows)


def test_refine_smooth_bump():  # [DERIVED] differences shrink monotonically
    dom = Domain(FULL_SPACE, ((-1.3, 1.2), (-1.1, 1.4)))
    d = exterior_derivative(form("x1 * bump(0, 1)", ["x2"], 2))
    rows = refine_sequence(lambda m: integrate_interior(d, dom, GridSpec(m)), 8, 5)
    diffs = [abs(r.diff) for r in rows[1:]]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_refine_kinked_abs():  # [DERIVED] analytic value 1; error bounded by the cell width
    dom = Domain(FULL_SPACE, ((-1, 1), (0, 1)))
    d = exterior_derivative(form("x1 * abs(x1) / 2", ["x2"], 2))
    rows = refine_sequence(lambda m: integrate_interior(d, dom, GridSpec(m, jitter=0.3, seed=1), check=False), 3, 5)
    for r in rows:
        assert abs(r.value - 1.0) <= 2.0 / r.m
    assert abs(rows[-1].value - 1.0) <= 1e-3


def test_refine_needs_two_levels():
    with pytest.raises(UsageError):
        refine_sequence(lambda m: 0.0, 4, 1)


# ---------------------------------------------------------------- properties


@given(alpha=st.floats(-5, 5), seed=st.integers(0, 3))
def test_linearity(alpha, seed):
    w1 = form("bump(0, 1) * x1", ["x2"], 2)
    w2 = form("bump(0, 1) * abs(x2 - 0.2)", ["x1 + x2"], 2)
    grid = GridSpec(16, jitter=0.25, seed=seed)
    dom = Domain(FULL_SPACE, ((-1.5, 1.5), (-1.5, 1.5)))
    scaled = SimpleForm(w1.coefficient * alpha, w1.factors, 2)
    both = exterior_derivative(FormSum((scaled, w2), 2, 1))
    i1 = integrate_interior(exterior_derivative(w1), dom, grid)
    i2 = integrate_interior(exterior_derivative(w2), dom, grid)
    assert integrate_interior(both, dom, grid) == pytest.approx(alpha * i1 + i2, abs=1e-12)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3), m=st.integers(2, 12))
def test_midpoint_exact_on_affine(a, b, c, m):
    d = exterior_derivative(form(f"({a!r}) * x1 + ({b!r}) * x1 * x2 / 2 + ({c!r}) * x1 * x1 / 2", ["x2"], 2))
    # volume coefficient a + b x2 / 2 ... affine in (x1, x2); box symmetric about 0
    dom = Domain(FULL_SPACE, ((-1, 1), (-2, 2)))
    assert integrate_interior(d, dom, GridSpec(m), check=False) == pytest.approx(8 * a, abs=1e-13 * (1 + abs(a)) * 8)


def test_deterministic_bits():
    grid = GridSpec(32, "gauss", 2)
    w = form("max(0, 1 - abs(x1 - 0.13) - x2) * (1 + x1)", ["min(x1, 2*x2) + x2"], 2)
    dom = Domain(HALF_SPACE, ((-1.5, 1.5), (0, 1.5)))
    assert stokes_pair(w, dom, grid) == stokes_pair(w, dom, grid)
