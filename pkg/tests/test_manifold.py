import numpy as np
import pytest

from lipstokes.errors import ConfigError, PartitionError, SupportLeakError, UsageError
from lipstokes.expr import parse_field
from lipstokes.fields import SamplePlan, constant
from lipstokes.forms import SimpleForm, coefficient
from lipstokes.integrate import FULL_SPACE, HALF_SPACE, Domain, GridSpec, stokes_pair
from lipstokes.manifold import (
    Atlas,
    Chart,
    identity_chart,
    manifold_pair,
    naturality_gap,
    pullback,
    scale_by_bump,
    stokes_manifold,
)
from lipstokes.scenario import find_builtin, load_scenario


def form(coef, factors, n):
    return SimpleForm(parse_field(coef, n), tuple(parse_field(g, n) for g in factors), n)


def fields(texts, n):
    return tuple(parse_field(t, n) for t in texts)


COLLAR_TARGET = Domain(HALF_SPACE, ((-np.pi, np.pi), (0, 0.65)), periodic=(1,))
COLLAR = Chart(
    "collar",
    fields(["atan2(x2, x1)", "1 - sqrt(x1^2 + x2^2)"], 2),
    fields(["(1 - x2) * cos(x1)", "(1 - x2) * sin(x1)"], 2),
    COLLAR_TARGET,
    {1: 2 * np.pi},
)


def collar_points(count=50, seed=0):
    return SamplePlan(((-3.0, 3.0), (0.05, 0.6)), count, seed).points()


# ---------------------------------------------------------------- charts


def test_collar_inverse_checks():
    assert COLLAR.inverse_error() <= 1e-10
    COLLAR.validate()


def test_bad_inverse_rejected():
    bad = Chart("bad", fields(["x1", "x2"], 2), fields(["x1 + 0.01", "x2"], 2), Domain(FULL_SPACE, ((-1, 1), (-1, 1))))
    with pytest.raises(ConfigError, match="bad"):
        bad.validate()


def test_chart_arity_checked():
    with pytest.raises(ConfigError):
        Chart("c", fields(["x1"], 2), fields(["x1", "x2"], 2), Domain(FULL_SPACE, ((-1, 1), (-1, 1))))


# ---------------------------------------------------------------- pullback


def test_pullback_identity():  # [TRIVIAL]
    w = form("x1 * abs(x2)", ["x1 + x2"], 2)
    chart = identity_chart(Domain(FULL_SPACE, ((-1, 1), (-1, 1))))
    assert pullback(chart, w) is w


def test_pullback_translation():  # [TRIVIAL] substitution y + c
    chart = Chart("shift", fields(["x1 - 0.5", "x2 + 2"], 2), fields(["x1 + 0.5", "x2 - 2"], 2),
                  Domain(FULL_SPACE, ((-1, 1), (-1, 1))))
    p = pullback(chart, form("x1", ["x2"], 2))
    Y = SamplePlan(((-1, 1), (-1, 1)), 30, 1).points()
    np.testing.assert_allclose(coefficient(p, (2,), Y), Y[:, 0] + 0.5, atol=1e-15)
    np.testing.assert_allclose(coefficient(p, (1,), Y), 0.0, atol=1e-15)


def test_pullback_polar_chain_rule():  # [DERIVED] oracle: x1(psi(y)) times the minors of D psi
    p = pullback(COLLAR, form("x1", ["x2"], 2))
    Y = collar_points(50, 2)
    th, s = Y[:, 0], Y[:, 1]
    x1 = (1 - s) * np.cos(th)
    dpsi2 = np.stack([(1 - s) * np.cos(th), -np.sin(th)], axis=1)  # d psi_2 / d(theta, s)
    for j in (1, 2):
        np.testing.assert_allclose(coefficient(p, (j,), Y), x1 * dpsi2[:, j - 1], atol=1e-8)


def test_pullback_arity_mismatch():
    with pytest.raises(UsageError):
        pullback(COLLAR, form("x1", ["x2", "x3"], 3))


# ---------------------------------------------------------------- scale_by_bump


def test_scale_by_one():  # [TRIVIAL]
    w = form("x1", ["x2"], 2)
    assert scale_by_bump(constant(1.0, 2), w) is w


def test_scale_by_zero():  # [TRIVIAL]
    s = scale_by_bump(constant(0.0, 2), form("x1 + 3", ["x2"], 2))
    np.testing.assert_array_equal(coefficient(s, (2,), SamplePlan(((-1, 1), (-1, 1)), 20, 0).points()), 0.0)


def test_scale_by_bump_coefficient():  # [TRIVIAL]
    rho = parse_field("bump(0, 1)", 2)
    s = scale_by_bump(rho, form("1", ["x1"], 2))
    X = SamplePlan(((-1, 1), (-1, 1)), 20, 3).points()
    np.testing.assert_array_equal(coefficient(s, (1,), X), rho.eval(X))


def test_scale_by_bump_lip_bound():
    rho = parse_field("bump(0, 1)", 2, 2.5)
    f = parse_field("x1 + 2", 2, 1.0)
    s = scale_by_bump(rho, SimpleForm(f, (parse_field("x2", 2),), 2), box=((-1, 1), (-1, 1)))
    # Lip(rho) sup|f| + sup|rho| Lip(f) with interval bounds sup|f| = 3, sup|rho| = 1
    assert s.coefficient.lip_bound == pytest.approx(2.5 * 3 + 1 * 1.0)


# ---------------------------------------------------------------- atlas / partition


def disk():
    return load_scenario(find_builtin("disk-atlas"))


def test_disk_partition_sums_to_one():
    dev, neg = disk().atlas.partition_defect(2000, 4)
    assert dev <= 1e-12 and neg == 0.0


def test_partition_error():
    sc = disk()
    a = sc.atlas
    broken = Atlas(a.charts, (a.bumps[0], a.bumps[0]), a.support_box, a.region)
    with pytest.raises(PartitionError):
        broken.check_partition()


def test_negative_bump_rejected():
    chart = identity_chart(Domain(FULL_SPACE, ((-1, 1), (-1, 1))))
    atlas = Atlas((chart, chart), (parse_field("1 + x1", 2), parse_field("-x1", 2)), ((-1, 1), (-1, 1)))
    with pytest.raises(PartitionError, match="negative"):
        atlas.check_partition()


def test_atlas_shape_checked():
    chart = identity_chart(Domain(FULL_SPACE, ((-1, 1), (-1, 1))))
    with pytest.raises(ConfigError):
        Atlas((chart,), (), ((-1, 1), (-1, 1)))


def test_disk_area():  # [DERIVED] polar oracle: both totals equal the area pi
    sc = disk()
    rep = stokes_manifold(sc.atlas, sc.form, GridSpec(16, "gauss", 4, levels=3))
    assert rep.boundary_integral == pytest.approx(np.pi, abs=1e-8)
    assert rep.interior_integral == pytest.approx(np.pi, abs=1e-8)
    assert rep.relative_residual <= 1e-2


def test_disk_other_partition():
    sc = disk()
    charts = sc.atlas.charts
    plateaus = (
        parse_field("1 - smoothstep(x1^2 + x2^2, 0.2, 0.45)", 2),
        parse_field("smoothstep(x1^2 + x2^2, 0.15, 0.35)", 2),
    )
    other = Atlas.normalized(charts, plateaus, sc.atlas.support_box, sc.atlas.region)
    other.validate()
    grid = GridSpec(64, "gauss", 4)
    a = manifold_pair(sc.atlas, sc.form, grid)
    b = manifold_pair(other, sc.form, grid)
    assert a[0] == pytest.approx(b[0], abs=1e-8) and a[1] == pytest.approx(b[1], abs=1e-8)


def test_disk_partition_too_wide_leaks():
    sc = disk()
    plateaus = (
        parse_field("1 - smoothstep(x1^2 + x2^2, 0.25, 0.7)", 2),
        parse_field("smoothstep(x1^2 + x2^2, 0.1, 0.3)", 2),
    )
    wide = Atlas.normalized(sc.atlas.charts, plateaus, sc.atlas.support_box, sc.atlas.region)
    with pytest.raises(SupportLeakError):
        manifold_pair(wide, sc.form, GridSpec(16, "gauss", 4))


def test_single_identity_chart_bit_for_bit():
    dom = Domain(HALF_SPACE, ((-2, 2), (0, 2)))
    w = form("bump(x1, 0, 1) * max(0, 1 - x2)", ["x1"], 2)
    atlas = Atlas.normalized((identity_chart(dom),), (constant(1.0, 2),), dom.box)
    grid = GridSpec(32, "gauss", 4)
    assert manifold_pair(atlas, w, grid) == stokes_pair(w, dom, grid)


def test_full_space_single_chart():  # [TRIVIAL]
    dom = Domain(FULL_SPACE, ((-1.5, 1.5), (-1.5, 1.5)))
    atlas = Atlas.normalized((identity_chart(dom),), (constant(1.0, 2),), dom.box)
    b, i = manifold_pair(atlas, form("bump(0, 1) * x1", ["x2^2"], 2), GridSpec(16, "gauss", 4))
    assert b == 0.0 and abs(i) <= 1e-12


# ---------------------------------------------------------------- naturality


@pytest.mark.parametrize(
    "w",
    [form("x1", ["x2"], 2), form("bump(0, 1) * sin(x1)", ["x1 * x2"], 2), form("exp(x1)", ["x2^3"], 2)],
    ids=["x1dx2", "bump", "exp"],
)
def test_naturality_smooth(w):
    assert naturality_gap(COLLAR, w, collar_points(50, 5)) <= 1e-8


@pytest.mark.parametrize(
    "w",
    [form("abs(x1 - 0.1)", ["x2"], 2), form("max(0, 1 - abs(x1) - abs(x2))", ["min(x1, 2*x2)"], 2)],
    ids=["abs", "pyramid"],
)
def test_naturality_lipschitz(w):
    assert naturality_gap(COLLAR, w, collar_points(50, 6)) <= 1e-5


def test_naturality_3d_shear():
    chart = Chart(
        "shear",
        fields(["x1 - x2^2", "x2", "x3 - 0.5*x1"], 3),
        fields(["x1 + x2^2", "x2", "x3 + 0.5*(x1 + x2^2)"], 3),
        Domain(FULL_SPACE, ((-1, 1),) * 3),
    )
    chart.validate()
    w = form("x1 * x3 + abs(x2)", ["sin(x1) + x3", "x2 * x3"], 3)
    Y = SamplePlan(((-1, 1),) * 3, 50, 7).points()
    assert naturality_gap(chart, w, Y) <= 1e-5
