"""Random sweep that tallies every theorem check produced by ``analyze``.

Usage: python scripts/theorem_sweep.py [--draws 2000] [--seed 1]
"""
import argparse
import collections
import time

import numpy as np

from lgin import analyze
from lgin.sweep import draw_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    t0 = time.perf_counter()
    counts = collections.Counter()
    failures = collections.Counter()
    for p in draw_params(np.random.default_rng(args.seed), args.draws):
        rep = analyze(p)
        counts[len(rep.equilibria.nonneg)] += 1
        for c in rep.theorem_checks:
            if not c.passed:
                failures[c.name] += 1
                print(f"FAIL {c.name} at {p.as_dict()}: {c.detail}")
    print(f"{args.draws} draws in {time.perf_counter() - t0:.1f} s")
    print("equilibrium counts:", dict(sorted(counts.items())))
    print("failed checks:", dict(failures) or "none")


if __name__ == "__main__":
    main()
