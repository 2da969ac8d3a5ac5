#!/usr/bin/env python3
"""Generate a synthetic canonical CSV (group, score, label) for demos.

Two groups with shifted Beta-distributed targets; score = label, matching
the identity-regressor evaluation setup.

Usage: python scripts/make_synthetic_data.py --out data/synthetic.csv --n 2000
"""

import argparse
import pathlib
import sys

import numpy as np

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", required=True)
parser.add_argument("--n", type=int, default=2000)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

rng = np.random.default_rng(args.seed)
path = pathlib.Path(args.out)
path.parent.mkdir(parents=True, exist_ok=True)
with open(path, "w", encoding="utf-8") as fh:
    fh.write("group,score,label\n")
    for _ in range(args.n):
        if rng.random() < 0.55:
            g, y = "A", float(rng.beta(2.0, 5.0))
        else:
            g, y = "B", float(rng.beta(5.0, 2.0))
        fh.write(f"{g},{y!r},{y!r}\n")
print(f"wrote {args.n} rows to {path}", file=sys.stderr)
