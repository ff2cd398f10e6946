"""Locate the fold in c1 for the symmetric bistable instance and describe it."""
import argparse

from lgin import ModelParams, contact_order, find_equilibria, fold_search


def describe(p):
    eqs = find_equilibria(p)
    for e in eqs.nonneg:
        print(f"  ({e.point.x:.6f}, {e.point.y:.6f})  {e.label.value:<13} "
              f"lambda1={e.eig.lambda1:.9f}  contact order {contact_order(p, e)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", default="6,6,3,3,0.01,0.01", help="b1,b2,c1,c2,h1,h2")
    ap.add_argument("--param", default="c1")
    ap.add_argument("--lo", type=float, default=0.3)
    ap.add_argument("--hi", type=float, default=3.0)
    args = ap.parse_args()

    base = ModelParams(*map(float, args.base.split(",")))
    fold = fold_search(base, args.param, args.lo, args.hi)
    v = getattr(fold, args.param)
    print(f"fold at {args.param} = {v:.15g}")
    describe(fold)
    for s in (-1e-3, 1e-3):
        q = fold.with_(**{args.param: v * (1 + s)})
        print(f"{args.param} = {getattr(q, args.param):.9g}: {find_equilibria(q).count} equilibria")
        describe(q)


if __name__ == "__main__":
    main()
