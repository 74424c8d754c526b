#!/usr/bin/env python3
"""Recompute the published Nile water-rights table and print the report.

Equivalent to `rivershare reproduce-nile`; kept as a script so the headline
result of the package is one command away from a checkout.
"""

import argparse
import sys

from rivershare.reproduction import build_nile_report, render


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--format", choices=("text", "csv", "json"), default="text")
    parser.add_argument("--decimals", type=int, default=2)
    args = parser.parse_args()
    report = build_nile_report()
    sys.stdout.write(render(report, fmt=args.format, decimals=args.decimals))
    return 0


if __name__ == "__main__":
    sys.exit(main())
