"""Command line: ``lipstokes verify``, ``lipstokes suite`` and ``lipstokes list``.

Exit codes: 0 success, 1 tolerance failure, 2 configuration or parse
error, 3 support leak.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, LipStokesError
from .runner import (
    exit_code,
    format_table,
    level_table,
    mollification_table,
    run_scenario,
    run_suite,
    suite_exit_code,
)
from .scenario import builtin_scenarios, find_builtin, load_scenario


def _resolve(target: str):
    path = Path(target)
    if path.is_file():
        return load_scenario(path)
    builtin = find_builtin(target)
    if builtin is None:
        raise ConfigError(f"no scenario file or built-in scenario named {target!r}")
    return load_scenario(builtin)


def cmd_verify(args) -> int:
    sc = _resolve(args.scenario).with_grid(args.cells, args.levels, args.seed)
    report = run_scenario(sc, flip_sign=args.flip_boundary_sign)
    if args.csv:
        report.to_csv(args.csv)
    if args.json:
        report.to_json(args.json)
    if args.mollification_csv:
        if not report.mollification:
            raise ConfigError(f"scenario {sc.name!r} has no mollification schedule")
        report.mollification_csv(args.mollification_csv)
    if not args.quiet:
        print(f"scenario {sc.name} ({sc.setting}), rule {sc.grid.rule}"
              + (f"({sc.grid.order})" if sc.grid.rule == "gauss" else ""))
        print(level_table(report.rows))
        if report.mollification:
            print()
            print(mollification_table(report.mollification))
        print()
        print(f"boundary {report.boundary_integral:.15g}  interior {report.interior_integral:.15g}")
        status = "pass" if report.passed else "FAIL"
        print(f"relative residual {report.relative_residual:.3e}  tolerance {sc.tolerance:g}  {status}")
    return exit_code(report)


def cmd_suite(args) -> int:
    results = run_suite(args.filter, flip_sign=args.flip_boundary_sign, scenarios=builtin_scenarios())
    print(format_table(results))
    passed = sum(r.passed for r in results)
    print(f"\n{passed}/{len(results)} scenarios passed in {sum(r.seconds for r in results):.1f}s")
    if args.json:
        payload = [
            {
                "name": r.name,
                "setting": r.setting,
                "passed": r.passed,
                "failures": r.failures,
                "seconds": r.seconds,
                "report": None if r.report is None else r.report.to_dict(),
            }
            for r in results
        ]
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return suite_exit_code(results)


def cmd_list(args) -> int:
    for sc in builtin_scenarios():
        print(f"{sc.name:<24} {sc.setting:<10} {', '.join(sc.tags)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipstokes", description="Stokes checks for Lipschitz differential forms.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one scenario file or built-in scenario")
    v.add_argument("scenario", help="path to a YAML scenario or the name of a built-in one")
    v.add_argument("--levels", type=int, help="number of refinement levels")
    v.add_argument("--cells", type=int, help="cells per axis on the coarsest level")
    v.add_argument("--seed", type=int, help="seed for the midpoint jitter")
    v.add_argument("--csv", metavar="OUT", help="write the refinement table as CSV")
    v.add_argument("--json", metavar="OUT", help="write the full report as JSON")
    v.add_argument("--mollification-csv", metavar="OUT", help="write the mollification table as CSV")
    v.add_argument("--flip-boundary-sign", action="store_true", help="debug: negate boundary integrals")
    v.add_argument("-q", "--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("suite", help="run the built-in scenarios")
    s.add_argument("--filter", help="only scenarios whose name contains this text")
    s.add_argument("--flip-boundary-sign", action="store_true", help="debug: negate boundary integrals")
    s.add_argument("--json", metavar="OUT", help="write per-scenario results as JSON")
    s.set_defaults(func=cmd_suite)

    ls = sub.add_parser("list", help="list the built-in scenarios")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LipStokesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
