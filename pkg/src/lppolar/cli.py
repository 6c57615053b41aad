"""Batch front-end: load bodies, compute Lp quantities, run the lemma suite,
and emit JSON-lines or CSV reports.

JSON is the source of truth; CSV is a fixed-column projection of it.  Every
row carries the seed and the quadrature-spec hash so runs can be replayed
byte-for-byte.  Infinite Mahler volumes are encoded as null plus a finite
flag (JSON has no Infinity literal).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from . import bodies as bd
from .corpus import corpus
from .errors import LpPolarError
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .santalo import ball_reference, santalo_point
from .support import LpSupportEvaluator, PExponent, PolarFunctional, mahler_volume
from .verify import run_suite

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_COMPUTE_COLUMNS = [
    "body", "p", "volume", "barycenter", "santalo", "mahler", "mahler_finite",
    "polar_volume", "seed", "quad_hash",
]
_VERIFY_COLUMNS = [
    "lemma", "body_index", "p", "lhs", "rhs", "slack", "error_bound", "verdict",
    "seed", "quad_hash",
]
_SWEEP_COLUMNS = ["body", "p", "mahler_at_santalo", "h_at_y0", "seed", "quad_hash"]


def _parse_p_list(text: str) -> List[PExponent]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty p list")
    return [PExponent.coerce(t) for t in items]


def _load_bodies(paths: List[str]) -> List[bd.ConvexBody]:
    out = []
    for path in paths:
        with open(path) as fh:
            data = json.load(fh)
        items = data if isinstance(data, list) else [data]
        out.extend(bd.body_from_dict(d) for d in items)
    return out


def _spec_from_args(args) -> QuadratureSpec:
    kw = {"mc_seed": args.seed}
    if args.sphere_nodes is not None:
        kw["sphere_nodes"] = args.sphere_nodes
        kw["sphere_nodes_inf"] = max(args.sphere_nodes, 512)
    if args.rel_tol is not None:
        kw["radial_rel_tol"] = args.rel_tol
    return DEFAULT_SPEC.with_(**kw)


def _encode_float(v: float):
    if v is None or (isinstance(v, float) and math.isinf(v)):
        return None
    return v


def _write_rows(rows: List[dict], columns: List[str], out: Optional[str], fmt: str) -> None:
    if fmt == "json":
        text = "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in columns])
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v):
    if v is None:
        return "inf"
    if isinstance(v, (list, tuple)):
        return ";".join(repr(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return v


def _max_workers() -> int:
    env = os.environ.get("LP_POLAR_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def cmd_compute(args) -> int:
    spec = _spec_from_args(args)
    bodies_list = _load_bodies(args.body)
    ps = _parse_p_list(args.p)

    def one(item):
        idx, K = item
        rows = []
        vol = bd.volume(K)
        bc = bd.barycenter(K)
        for p in ps:
            res = santalo_point(K, p, spec=spec)
            m = mahler_volume(K, p, x=res.point, spec=spec)
            pol = (
                PolarFunctional.at(K, p, x=res.point, spec=spec).volume()
                if math.isfinite(m)
                else math.inf
            )
            rows.append({
                "body": idx,
                "p": p.label(),
                "volume": vol,
                "barycenter": [float(v) for v in bc],
                "santalo": [float(v) for v in res.point],
                "mahler": _encode_float(m),
                "mahler_finite": math.isfinite(m),
                "polar_volume": _encode_float(pol),
                "seed": args.seed,
                "quad_hash": spec.hash(),
            })
        return rows

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        chunks = list(pool.map(one, enumerate(bodies_list)))
    rows = [r for chunk in chunks for r in chunk]
    _write_rows(rows, _COMPUTE_COLUMNS, args.out, args.format)
    return 0


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    if args.body:
        bodies_list = _load_bodies(args.body)
    else:
        bodies_list = corpus(args.seed, count=args.corpus_size)
    ps = _parse_p_list(args.p)

    def one(item):
        idx, K = item
        reps = run_suite([K], ps, seed=args.seed + idx, spec=spec,
                         slice_samples=args.slice_samples)
        rows = []
        for rep in reps:
            d = rep.to_dict()
            d["body_index"] = idx
            d["seed"] = args.seed
            d["quad_hash"] = spec.hash()
            rows.append(d)
        return rows

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        chunks = list(pool.map(one, enumerate(bodies_list)))
    rows = [r for chunk in chunks for r in chunk]
    for r in rows:
        r["p"] = r["inputs"].get("p")
        r["lhs"] = _encode_float(r["lhs"])
        r["rhs"] = _encode_float(r["rhs"])
    _write_rows(rows, _VERIFY_COLUMNS, args.out, args.format)
    n_fail = sum(1 for r in rows if r["verdict"] == "fail")
    if n_fail:
        print(f"{n_fail} verification failures", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    bodies_list = _load_bodies(args.body)
    if len(bodies_list) != 1:
        raise ValueError("sweep expects exactly one body")
    K = bodies_list[0]
    ps = _parse_p_list(args.p)
    y0 = np.array([float(t) for t in args.y0.split(",")])
    rows = []
    for p in ps:
        res = santalo_point(K, p, spec=spec)
        m = mahler_volume(K, p, x=res.point, spec=spec)
        h = LpSupportEvaluator(K, p, spec).h(y0)
        rows.append({
            "body": 0,
            "p": p.label(),
            "mahler_at_santalo": _encode_float(m),
            "h_at_y0": h,
            "seed": args.seed,
            "quad_hash": spec.hash(),
        })
    _write_rows(rows, _SWEEP_COLUMNS, args.out, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lppolar",
        description="Lp-polarity computations and inequality verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--body", action="append", default=[],
                        help="JSON body file (repeatable)")
        sp.add_argument("--p", default="0.5,1,2,inf", help="comma list, e.g. 1,2,inf")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--sphere-nodes", type=int, default=None)
        sp.add_argument("--rel-tol", type=float, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("compute", help="volumes, Santalo points, Mahler volumes")
    common(sp)
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("verify", help="run the lemma verification suite")
    common(sp)
    sp.add_argument("--corpus-size", type=int, default=10,
                    help="random bodies when no --body is given")
    sp.add_argument("--slice-samples", type=int, default=50)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="emit (p, Mahler) and (p, h(y0)) series")
    common(sp)
    sp.add_argument("--y0", default="1,0", help="evaluation point for h, e.g. 1,0")
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        if args.command == "compute" and not args.body:
            raise ValueError("compute requires at least one --body")
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LpPolarError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
