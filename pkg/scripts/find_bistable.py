"""Grid-scan symmetric parameter sets and report the bistable ones.

Usage: python scripts/find_bistable.py [--n 7] [--out bistable.csv]
"""
import argparse
import csv
import sys

import numpy as np

from lgin import ModelParams, find_equilibria, mm_check
from lgin.equilibria import MmWitness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7, help="grid points per axis")
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["b", "c", "h", "x1", "y1", "x2", "y2", "x3", "y3", "mm_residual"])
    hits = 0
    for b in np.linspace(2, 10, args.n):
        for c in np.linspace(0.5, 6, args.n):
            for h in np.geomspace(1e-3, 0.3, args.n):
                p = ModelParams(b, b, c, c, h, h)
                eqs = find_equilibria(p)
                if eqs.count != 3:
                    continue
                hits += 1
                e1, e2, e3 = (e.point for e in eqs.nonneg)
                # the two outer equilibria give an off-diagonal M&m solution
                res = mm_check(p, MmWitness(e1.x, e3.x, e3.y, e1.y)).system_residual
                w.writerow([f"{v:.6g}" for v in (b, c, h, *e1, *e2, *e3, res)])
    print(f"# {hits} bistable parameter sets out of {args.n ** 3}", file=sys.stderr)


if __name__ == "__main__":
    main()
