"""Two-chart unit disk: integrals of x1 dx2 per refinement level and for a second partition of unity."""

import argparse
from dataclasses import replace

import numpy as np

from lipstokes.expr import parse_field
from lipstokes.manifold import Atlas, manifold_pair
from lipstokes.scenario import find_builtin, load_scenario

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cells", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    p.add_argument("--rule", default="gauss", choices=["gauss", "midpoint"])
    a = p.parse_args()
    sc = load_scenario(find_builtin("disk-atlas"))
    grid = sc.grid if a.rule == "gauss" else replace(sc.grid, rule="midpoint", order=1)
    other = Atlas.normalized(
        sc.atlas.charts,
        (
            parse_field("1 - smoothstep(x1^2 + x2^2, 0.2, 0.45)", 2),
            parse_field("smoothstep(x1^2 + x2^2, 0.15, 0.35)", 2),
        ),
        sc.atlas.support_box,
        sc.atlas.region,
    )
    print(f"{'m':>5} {'boundary - pi':>14} {'interior - pi':>14} {'alt boundary - pi':>18} {'alt interior - pi':>18}")
    for m in a.cells:
        b, i = manifold_pair(sc.atlas, sc.form, grid, m)
        b2, i2 = manifold_pair(other, sc.form, grid, m)
        print(f"{m:>5} {b - np.pi:>14.3e} {i - np.pi:>14.3e} {b2 - np.pi:>18.3e} {i2 - np.pi:>18.3e}")
