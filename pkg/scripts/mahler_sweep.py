#!/usr/bin/env python3
"""Sweep p and plot-ready data: M_p(K - s_p(K)) against the ball value.

Writes a CSV with one row per p; feed it to any plotting tool.  Example:

    python scripts/mahler_sweep.py --kind square --out sweep.csv
"""

import argparse
import csv
import math
import sys

from lppolar import bodies as bd
from lppolar.corpus import random_hull
from lppolar.santalo import ball_reference, santalo_point
from lppolar.support import mahler_volume

import numpy as np


def make_body(kind: str, seed: int):
    if kind == "square":
        return bd.vpolytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    if kind == "triangle":
        return bd.vpolytope([[-1, 1], [2, 1], [0, 2]])
    if kind == "random":
        return random_hull(np.random.default_rng(seed))
    raise ValueError(f"unknown body kind {kind!r}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=("square", "triangle", "random"), default="square")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p-grid", default="0.25,0.5,1,2,4,8,16,inf")
    ap.add_argument("--out", default="mahler_sweep.csv")
    args = ap.parse_args()

    K = make_body(args.kind, args.seed)
    ps = [math.inf if t == "inf" else float(t) for t in args.p_grid.split(",") if t]
    with open(args.out, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "mahler_at_santalo", "ball_reference", "ratio"])
        for p in ps:
            res = santalo_point(K, p)
            m = mahler_volume(K, p, x=res.point)
            ref = ball_reference(2, p)
            w.writerow([p, m, ref, m / ref])
            print(f"p={p}: M={m:.6f}  M(ball)={ref:.6f}  ratio={m / ref:.4f}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
