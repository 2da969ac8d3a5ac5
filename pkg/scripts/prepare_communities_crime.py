#!/usr/bin/env python3
"""Build the canonical Communities & Crime CSV from the UCI distribution.

Input: ``communities.data`` (no header, comma-separated, ``?`` for missing).
The target is ViolentCrimesPerPop (last column, already normalized to
[0, 1]); the group is a minority-presence indicator.

Recipe (documented choices):
  * the indicator for "significant presence of a minority population" is a
    median split on the black-population share column (index 7 in the UCI
    layout): communities at or below the median are "majority", the rest
    "minority" -- the exact threshold is not prescribed anywhere, so the
    median is used to make the two groups comparable in size;
  * rows with a missing group or target cell are dropped (the standard
    distribution has neither missing);
  * score = label = ViolentCrimesPerPop.

The full dataset has 1,994 rows.

Usage:
  python scripts/prepare_communities_crime.py --raw communities.data \
      --out data/communities_crime.csv
"""

import argparse
import csv
import pathlib
import sys

EXPECTED_N = 1994

parser = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
parser.add_argument("--raw", required=True, help="UCI communities.data")
parser.add_argument("--out", required=True)
parser.add_argument("--black-col", type=int, default=7,
                    help="index of the racepctblack column (UCI layout: 7)")
parser.add_argument("--target-col", type=int, default=-1,
                    help="index of the ViolentCrimesPerPop column (default: last)")
args = parser.parse_args()

records = []
with open(args.raw, newline="", encoding="utf-8") as fh:
    for row in csv.reader(fh):
        if not row:
            continue
        black, target = row[args.black_col].strip(), row[args.target_col].strip()
        if black in ("", "?") or target in ("", "?"):
            continue
        records.append((float(black), float(target)))

if not records:
    sys.exit("no usable rows in the raw file")

shares = sorted(b for b, _ in records)
median = shares[len(shares) // 2]

out = pathlib.Path(args.out)
out.parent.mkdir(parents=True, exist_ok=True)
with open(out, "w", encoding="utf-8") as fh:
    fh.write("group,score,label\n")
    for black, target in records:
        group = "minority" if black > median else "majority"
        fh.write(f"{group},{target!r},{target!r}\n")

n_min = sum(1 for b, _ in records if b > median)
print(f"wrote {len(records)} rows ({n_min} minority / {len(records) - n_min} majority, "
      f"median share {median}) -> {out}", file=sys.stderr)
if len(records) != EXPECTED_N:
    print(f"warning: expected {EXPECTED_N} rows, got {len(records)}", file=sys.stderr)
