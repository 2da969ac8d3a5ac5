#!/usr/bin/env python3
"""Build the canonical Law School CSV (group, score, label) from a raw export.

Input: a delimited file of the LSAC National Longitudinal Bar Passage Study
with a race column and an undergraduate-GPA column (UGPA on the 1-4 scale).
Common exports name them ``race1``/``race`` and ``ugpa``.

Recipe (documented choices):
  * rows with a missing race or GPA cell are dropped;
  * the four most frequent race categories are kept as the groups, all
    other rows are dropped;
  * score = label = UGPA (the identity-regressor evaluation setup).

The reference preprocessed dataset has 21,983 rows over 4 groups; the
script warns when the output differs, since that usually means a different
raw export.

Usage:
  python scripts/prepare_law_school.py --raw lsac.csv --out data/law_school.csv
"""

import argparse
import collections
import csv
import pathlib
import sys

EXPECTED_N = 21983

parser = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
parser.add_argument("--raw", required=True, help="raw law school CSV")
parser.add_argument("--out", required=True, help="canonical CSV destination")
parser.add_argument("--race-col", default=None,
                    help="race column name (default: try race1, then race)")
parser.add_argument("--gpa-col", default="ugpa")
parser.add_argument("--delimiter", default=",")
parser.add_argument("--groups", type=int, default=4,
                    help="keep this many most-frequent race categories")
args = parser.parse_args()

with open(args.raw, newline="", encoding="utf-8") as fh:
    reader = csv.DictReader(fh, delimiter=args.delimiter)
    fields = reader.fieldnames or []
    race_col = args.race_col
    if race_col is None:
        for cand in ("race1", "race"):
            if cand in fields:
                race_col = cand
                break
    if race_col is None or race_col not in fields:
        sys.exit(f"no race column found among {fields}")
    if args.gpa_col not in fields:
        sys.exit(f"GPA column {args.gpa_col!r} not found among {fields}")

    rows = []
    for row in reader:
        race = (row[race_col] or "").strip()
        gpa = (row[args.gpa_col] or "").strip()
        if not race or not gpa:
            continue
        try:
            val = float(gpa)
        except ValueError:
            continue
        rows.append((race, val))

counts = collections.Counter(r for r, _ in rows)
keep = {r for r, _ in counts.most_common(args.groups)}
kept = [(r, v) for r, v in rows if r in keep]

out = pathlib.Path(args.out)
out.parent.mkdir(parents=True, exist_ok=True)
with open(out, "w", encoding="utf-8") as fh:
    fh.write("group,score,label\n")
    for race, val in kept:
        fh.write(f"{race},{val!r},{val!r}\n")

print(f"kept {len(kept)} rows over groups {sorted(keep)} -> {out}", file=sys.stderr)
if len(kept) != EXPECTED_N:
    print(f"warning: expected {EXPECTED_N} rows, got {len(kept)}; "
          f"the raw export likely differs from the reference one", file=sys.stderr)
