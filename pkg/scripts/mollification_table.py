"""Mollified boundary and interior integrals against the unmollified pair for one scenario."""

import argparse

from lipstokes.runner import mollification_deviation, mollification_table, run_scenario
from lipstokes.scenario import find_builtin, load_scenario

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("scenario", nargs="?", default="h2-kinked")
    p.add_argument("--csv", metavar="OUT")
    a = p.parse_args()
    sc = load_scenario(find_builtin(a.scenario) or a.scenario)
    rep = run_scenario(sc)
    if not rep.mollification:
        raise SystemExit(f"{sc.name} has no mollification schedule")
    print(f"unmollified: boundary {rep.boundary_integral:.14f}  interior {rep.interior_integral:.14f}\n")
    print(mollification_table(rep.mollification))
    db, di = mollification_deviation(rep)
    print(f"\n{'eps':>10} {'|dev boundary|':>16} {'|dev interior|':>16}")
    for r, b, i in zip(rep.mollification, db, di):
        print(f"{r.eps:>10.6f} {b:>16.3e} {i:>16.3e}")
    if a.csv:
        rep.mollification_csv(a.csv)
