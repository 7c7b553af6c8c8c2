import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from lipstokes.expr import parse_node
from lipstokes.quadrature import gauss_legendre, integrate_boxes


def run(text, lo, hi, order=2, **kw):
    node = parse_node(text, len(lo))
    return integrate_boxes(node.value, np.array([lo]), np.array([hi]), order=order, switches=node.switches(), **kw)[0]


@given(order=st.integers(1, 8), k=st.integers(0, 15), a=st.floats(-2, 0), b=st.floats(0.1, 2))
def test_gauss_exact_on_polynomials(order, k, a, b):
    x, w = gauss_legendre(order)
    got = 0.5 * (b - a) * np.sum(w * (0.5 * (b - a) * x + 0.5 * (a + b)) ** k)
    want = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    if k <= 2 * order - 1:
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_smooth_box():
    # \int_0^1 \int_0^2 sin(x) cos(y) = (1 - cos 1) sin 2
    assert run("sin(x1) * cos(x2)", [0, 0], [1, 2], order=8) == pytest.approx((1 - np.cos(1)) * np.sin(2), abs=1e-13)


def test_pyramid_exact():
    # volume of the pyramid over the diamond |x1| + |x2| <= 1 is 2/3
    assert run("max(0, 1 - abs(x1) - abs(x2))", [-1, -1], [1, 1]) == pytest.approx(2 / 3, abs=1e-14)


def test_slanted_kinks_crossing_inside_cell():
    # two slanted kink lines meet inside the single cell; piecewise quadratic integrand
    text = "abs(x1 - x2 + 0.1) * abs(x1 + 2*x2 - 0.3)"
    f = lambda x, y: abs(x - y + 0.1) * abs(x + 2 * y - 0.3)  # noqa: E731

    # nested adaptive oracle, told where the kinks are (inner: both lines; outer: edge hit and crossing)
    def inner(x):
        return integrate.quad(lambda y: f(x, y), -1, 1, points=[x + 0.1, (0.3 - x) / 2], epsabs=1e-13, limit=200)[0]

    oracle = integrate.quad(inner, -1, 1, points=[0.9, 1 / 30], epsabs=1e-13, limit=200)[0]
    assert run(text, [-1, -1], [1, 1]) == pytest.approx(oracle, abs=1e-11)
    assert run(text, [-1, -1], [1, 1]) == pytest.approx(run(text, [-1, -1], [1, 1], order=4), abs=1e-14)


def test_kinked_switch_with_two_roots_in_one_probe():
    # max(0, 0.05 - |x|) on [-0.9, 1.1]: both roots of the V-shaped switch fall in one probe interval
    assert run("max(0, 0.05 - abs(x1))", [-0.9], [1.1]) == pytest.approx(0.05**2, abs=1e-16)


def test_nested_kinks_3d_subdivision_invariant():
    text = "max(0, 1 - abs(x1) - abs(x2) - x3)"
    node = parse_node(text, 3)
    lo = np.array([0.48588417, -0.45738782, 0.34512498])
    whole = integrate_boxes(node.value, lo[None], (lo + 0.5)[None], order=2, switches=node.switches())[0]
    h = 0.5 / 4
    L = np.array([lo + h * np.array(c) for c in itertools.product(range(4), repeat=3)])
    parts = integrate_boxes(node.value, L, L + h, order=3, switches=node.switches()).sum()
    assert whole == pytest.approx(parts, rel=1e-12)


def test_partial_axes():
    # integrate only over x2; x1 held at lo
    node = parse_node("x1 * abs(x2)", 2)
    v = integrate_boxes(node.value, np.array([[3.0, -1.0]]), np.array([[3.0, 1.0]]), axes=(1,), switches=node.switches())
    assert v[0] == pytest.approx(3.0, abs=1e-14)


def test_many_boxes_chunked():
    node = parse_node("abs(x1 - 0.3) + x2^2", 2)
    lo = np.stack(np.meshgrid(np.linspace(-1, 0.9, 20), np.linspace(-1, 0.9, 20)), -1).reshape(-1, 2)
    total = integrate_boxes(node.value, lo, lo + 0.1, order=2, switches=node.switches()).sum()
    # \int_{-1}^1 |x - 0.3| dx * 2 + 2 * 2/3 = (1.3^2/2 + 0.7^2/2) * 2 + 4/3
    assert total == pytest.approx((1.69 / 2 + 0.49 / 2) * 2 + 4 / 3, abs=1e-12)
