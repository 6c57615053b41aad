#!/usr/bin/env python3
"""Run the default lemma-verification corpus and write a JSONL report.

Equivalent to `lppolar verify` with the stock corpus; kept as a script so the
run is easy to tweak (corpus size, p grid, quadrature) during experiments.
"""

import argparse
import sys
import time

from lppolar.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--corpus-size", type=int, default=10)
    ap.add_argument("--p", default="0.5,1,2,inf")
    ap.add_argument("--out", default="verification_report.jsonl")
    args = ap.parse_args()

    t0 = time.time()
    code = cli_main([
        "verify",
        "--seed", str(args.seed),
        "--corpus-size", str(args.corpus_size),
        "--p", args.p,
        "--out", args.out,
    ])
    print(f"wrote {args.out} in {time.time() - t0:.1f}s (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
