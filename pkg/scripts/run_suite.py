"""Run the built-in scenario suite and print the summary table."""

import argparse
import sys

from lipstokes.cli import main

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--filter", help="only scenarios whose name contains this text")
    p.add_argument("--json", metavar="OUT")
    a = p.parse_args()
    argv = ["suite"] + (["--filter", a.filter] if a.filter else []) + (["--json", a.json] if a.json else [])
    sys.exit(main(argv))
