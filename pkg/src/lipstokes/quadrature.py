"""Tensor Gauss-Legendre quadrature over boxes, split at kink surfaces.

Integration is iterated axis by axis.  Along each axis the interval is cut
at the roots of every switching function (evaluated with the not-yet
integrated coordinates pinned at the box vertices) and at junctions where
several switching surfaces meet; a Gauss rule is applied on each piece.
For integrands that are piecewise polynomial across affine kinks the
result is exact; without switching functions it reduces to the plain
tensor Gauss rule.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

MAX_ROWS = 1_500_000
ROOT_ITERATIONS = 60
NEWTON_ITERATIONS = 12


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[-1, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _illinois(fun, a, b, fa, fb):
    """Vectorised Illinois (modified regula falsi) on sign-changing brackets."""
    a = a.copy()
    b = b.copy()
    fa = fa.copy()
    fb = fb.copy()
    root = 0.5 * (a + b)
    active = np.arange(a.size)
    for _ in range(ROOT_ITERATIONS):
        if active.size == 0:
            break
        aa, bb, faa, fbb = a[active], b[active], fa[active], fb[active]
        denom = fbb - faa
        c = np.where(denom != 0.0, bb - fbb * (bb - aa) / np.where(denom != 0.0, denom, 1.0), 0.5 * (aa + bb))
        fc = fun(c, active)
        flip = fc * fbb < 0.0
        new_a = np.where(flip, bb, aa)
        new_fa = np.where(flip, fbb, 0.5 * faa)
        a[active] = new_a
        fa[active] = new_fa
        b[active] = c
        fb[active] = fc
        root[active] = c
        done = (fc == 0.0) | (np.abs(c - new_a) <= 4e-16 * (1.0 + np.abs(c)))
        active = active[~done]
    return root


def _crossings(s, base, axis, a, b, samples, extra=None):
    """Roots of ``t -> s(base with base[:, axis] = t)`` on ``[a, b]``.

    The interval is probed at ``samples + 1`` equispaced nodes plus the
    ``extra`` nodes (NaN-padded, per row).  Returns shape ``(L, 2 * W)`` with
    ``W`` the number of probe intervals, NaN-padded.
    """
    L = base.shape[0]
    frac = np.linspace(0.0, 1.0, samples + 1)
    T = a[:, None] + (b - a)[:, None] * frac[None, :]
    if extra is not None and extra.shape[1]:
        E = np.where((extra > a[:, None]) & (extra < b[:, None]), extra, b[:, None])
        T = np.sort(np.concatenate([T, E], axis=1), axis=1)
    W = T.shape[1] - 1
    pts = np.repeat(base, W + 1, axis=0)
    pts[:, axis] = T.ravel()
    V = s.value(pts).reshape(L, W + 1)
    roots = np.full((L, W), np.nan)

    # exact zeros at interior probe nodes
    if W > 1:
        z = V[:, 1:-1] == 0.0
        roots[:, : W - 1] = np.where(z, T[:, 1:-1], np.nan)

    change = V[:, :-1] * V[:, 1:] < 0.0
    rows, cols = np.nonzero(change)
    found = np.full((L, W), np.nan)
    if rows.size:
        def fun(t, idx):
            p = base[rows[idx]].copy()
            p[:, axis] = t
            return s.value(p)

        r = _illinois(fun, T[rows, cols], T[rows, cols + 1], V[rows, cols], V[rows, cols + 1])
        found[rows, cols] = r
    return np.concatenate([roots, found], axis=1)


def _may_vanish(switches, pts, lo, hi, owner, axes):
    """Per switch, the rows whose box (over ``axes``) may contain a zero of it."""
    blo = pts.copy()
    bhi = pts.copy()
    ax = list(axes)
    blo[:, ax] = lo[owner][:, ax]
    bhi[:, ax] = hi[owner][:, ax]
    out = {}
    for s in switches:
        s0, s1 = s.bounds(blo, bhi)
        out[s] = np.broadcast_to((s0 <= 0.0) & (s1 >= 0.0), (pts.shape[0],))
    return out


def _on_rows(mask, fn, width):
    """Run ``fn(rows)`` on the masked rows only; NaN elsewhere."""
    out = np.full((mask.size, width), np.nan)
    rows = np.nonzero(mask)[0]
    if rows.size:
        out[rows] = fn(rows)
    return out


def _switch_roots(switches, may, pts, lo, hi, owner, axis, inner, samples, extra=None):
    a = lo[owner, axis]
    b = hi[owner, axis]
    cols = []
    for s in switches:
        dep = s.coords()
        if axis not in dep or not may[s].any():
            continue
        vert_axes = [i for i in inner if i in dep]
        for combo in itertools.product((0, 1), repeat=len(vert_axes)):
            base = pts.copy()
            for i, c in zip(vert_axes, combo):
                base[:, i] = (hi if c else lo)[owner, i]
            width = 2 * (samples + (0 if extra is None else extra.shape[1]))
            cols.append(_on_rows(
                may[s],
                lambda r: _crossings(s, base[r], axis, a[r], b[r], samples, None if extra is None else extra[r]),
                width,
            ))
    return cols


def _compact(cols, a, b):
    """Concatenate root columns, keep those inside ``(a, b)``, sort, drop empty columns."""
    if not cols:
        return np.empty((a.size, 0))
    R = np.concatenate(cols, axis=1)
    R = np.where((R > a[:, None]) & (R < b[:, None]), R, np.nan)
    R.sort(axis=1)
    keep = ~np.all(np.isnan(R), axis=0)
    return R[:, keep]


def _breakpoints(switches, pts, lo, hi, owner, axis, inner, samples):
    a = lo[owner, axis]
    b = hi[owner, axis]
    may = _may_vanish(switches, pts, lo, hi, owner, (axis, *inner))
    cols = _switch_roots(switches, may, pts, lo, hi, owner, axis, inner, samples)
    if inner:
        cols.extend(_junctions(switches, may, pts, lo, hi, owner, axis, inner))
    # a kinked switch may dip to zero and back inside one probe interval; its
    # kinks are roots of other switches, so probe again at every root found
    kinked = tuple(s for s in switches if s.switches())
    if kinked and cols:
        R = _compact(cols, a, b)
        if R.shape[1]:
            cols.extend(_switch_roots(kinked, may, pts, lo, hi, owner, axis, inner, samples, R))
    R = _compact(cols, a, b)
    return np.where(np.isnan(R), b[:, None], R)


def _junctions(switches, may, pts, lo, hi, owner, axis, inner):
    """Positions along ``axis`` where k switches vanish together inside the box.

    Solved by Newton in ``axis`` plus k-1 inner axes, the other inner axes
    pinned at box vertices.  Between such points the order of the inner
    breakpoints is fixed, so the inner integral is smooth.
    """
    live = tuple(s for s in switches if s.coords() & {axis, *inner} and may[s].any())
    cols = []
    for k in range(2, min(len(live), len(inner) + 1) + 1):
        for sub in itertools.combinations(live, k):
            deps = [s.coords() for s in sub]
            if all(len(d) == 1 for d in deps):
                continue  # axis-aligned kinks meet at already known breakpoints
            mask = np.logical_and.reduce([may[s] for s in sub])
            if not mask.any():
                continue
            for free in itertools.combinations(inner, k - 1):
                unknowns = (axis, *free)
                if not set(unknowns) <= set().union(*deps):
                    continue
                pinned = [i for i in inner if i not in free and any(i in d for d in deps)]
                for combo in itertools.product((0, 1), repeat=len(pinned)):
                    cols.append(_on_rows(
                        mask,
                        lambda r: _newton_junction(sub, pts[r], lo, hi, owner[r], axis, unknowns, pinned, combo),
                        1,
                    ))
    return cols


def _newton_junction(sub, pts, lo, hi, owner, axis, unknowns, pinned, combo):
    u = list(unknowns)
    base = pts.copy()
    for i, c in zip(pinned, combo):
        base[:, i] = (hi if c else lo)[owner, i]
    blo, bhi = lo[owner][:, u], hi[owner][:, u]
    base[:, u] = 0.5 * (blo + bhi)
    k = len(sub)
    eye = np.eye(k)
    for _ in range(NEWTON_ITERATIONS):
        vg = [s.value_grad(base) for s in sub]
        V = np.stack([v for v, _ in vg], axis=1)
        J = np.stack([g[:, u] for _, g in vg], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            det = np.linalg.det(J)
        good = np.isfinite(det) & (np.abs(det) > 1e-300)
        J[~good] = eye
        V = np.where(good[:, None], V, 0.0)
        if not np.any(V):
            break
        base[:, u] -= np.linalg.solve(J, V[..., None])[..., 0]
    V = np.stack([s.value(base) for s in sub], axis=1)
    width = bhi - blo
    inside = np.all((base[:, u] >= blo - 1e-12 * width) & (base[:, u] <= bhi + 1e-12 * width), axis=1)
    ok = good & inside & np.all(np.abs(V) <= 1e-10 * (1.0 + np.max(width, axis=1))[:, None], axis=1)
    return np.where(ok, base[:, axis], np.nan)[:, None]


def _integrate_chunk(func, lo, hi, axes, order, switches, samples):
    N = lo.shape[0]
    x, w = gauss_legendre(order)
    pts = lo.copy()
    owner = np.arange(N)
    weight = np.ones(N)
    for pos, k in enumerate(axes):
        inner = axes[pos + 1:]
        a = lo[owner, k]
        b = hi[owner, k]
        if switches:
            R = _breakpoints(switches, pts, lo, hi, owner, k, inner, samples)
        else:
            R = np.empty((pts.shape[0], 0))
        edges = np.concatenate([a[:, None], R, b[:, None]], axis=1)
        left = edges[:, :-1]
        right = edges[:, 1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        t = mid[:, :, None] + half[:, :, None] * x[None, None, :]
        wt = half[:, :, None] * w[None, None, :]
        per_row = t.shape[1] * t.shape[2]
        t = t.reshape(-1)
        wt = wt.reshape(-1)
        pts = np.repeat(pts, per_row, axis=0)
        owner = np.repeat(owner, per_row)
        weight = np.repeat(weight, per_row) * wt
        pts[:, k] = t
        live = wt != 0.0
        if not np.all(live):
            pts, owner, weight = pts[live], owner[live], weight[live]
    vals = func(pts)
    return np.bincount(owner, weights=weight * vals, minlength=N)


def integrate_boxes(func, lo, hi, axes=None, order=8, switches=(), samples=4):
    """Integrate ``func`` over each box ``[lo_i, hi_i]``.

    Parameters
    ----------
    func : callable
        Maps points of shape ``(M, d)`` to values of shape ``(M,)``.
    lo, hi : array_like, shape (N, d)
        Box corners.  Coordinates on axes not listed in ``axes`` are held
        fixed at ``lo``.
    axes : sequence of int, optional
        Axes to integrate over; all axes by default.
    order : int
        Gauss-Legendre points per piece and axis.
    switches : sequence of nodes
        Switching functions whose zero sets split the integration pieces.
    samples : int
        Sign-change probes per interval when locating roots.

    Returns
    -------
    ndarray, shape (N,)
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    N, d = lo.shape
    axes = tuple(range(d)) if axes is None else tuple(axes)
    switches = tuple(switches)
    growth = (3 * order) ** max(len(axes), 1)
    chunk = max(1, MAX_ROWS // growth)
    out = np.empty(N)
    for start in range(0, N, chunk):
        sl = slice(start, start + chunk)
        out[sl] = _integrate_chunk(func, lo[sl], hi[sl], axes, order, switches, samples)
    return out
