"""Command-line surface: fit, apply, evaluate, sweep.

Exit codes: 0 success, 2 config error, 3 data error, 4 solver error.

The privacy budget is spent once per fit.  A sweep re-fits many times on
the same file by design (that is what an experiment grid is), so it
refuses to run more than one finite-epsilon fit per file unless
``--allow-budget-reuse`` is passed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, pipeline, sweep
from .barycenter_lp import build_lp, lp_text
from .data_io import DatasetSchema, load_csv
from .dp_estimation import PrivateGroupDists
from .errors import ConfigError, DataError, SolverFailure, UnknownGroupError
from .metrics import mse, statistical_parity_gap


def _parse_hyper(value: str) -> float:
    if value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"expected a number or 'inf', got {value!r}") from None


def _load_schema(path: str | None) -> DatasetSchema:
    if path is None:
        return DatasetSchema()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read schema {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"schema {path} is not valid JSON: {exc}") from exc
    try:
        return DatasetSchema(
            group_col=doc.get("group", "group"),
            score_col=doc.get("score", "score"),
            label_col=doc.get("label", "label"),
            interval=tuple(doc.get("interval", (0.0, 1.0))),
            normalization=doc.get("normalization", "none"),
            delimiter=doc.get("delimiter", ","),
        )
    except ValueError as exc:
        raise ConfigError(f"schema {path}: {exc}") from exc


def _cmd_fit(args) -> int:
    schema = _load_schema(args.schema)
    samples = load_csv(args.data, schema)
    alpha = _parse_hyper(args.alpha)
    epsilon = _parse_hyper(args.epsilon)
    try:
        model = pipeline.fit(samples, schema.internal_interval, args.k,
                             alpha, epsilon, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    model.save(args.out)
    if args.dump_lp:
        # rebuilt from the released diagnostics; no second pass over the data
        cdfs = np.cumsum(model.pmfs, axis=1)
        cdfs[:, -1] = 1.0
        dists = PrivateGroupDists(weights=model.weights, pmfs=model.pmfs, cdfs=cdfs)
        instance = build_lp(dists, model.grid, alpha)
        with open(args.dump_lp, "w", encoding="utf-8") as fh:
            fh.write(lp_text(instance))
    print(f"wrote model to {args.out} (objective {model.objective:.6g})")
    return 0


def _cmd_apply(args) -> int:
    model = pipeline.load(args.model)
    schema = _load_schema(args.schema)
    samples = load_csv(args.data, schema)
    rng = np.random.default_rng(args.seed)
    rows = list(zip((samples.groups[i] for i in samples.group_idx), samples.scores))
    preds = model.predict_batch(rows, rng, mode=args.mode)
    raw = samples.transform.to_raw(preds)
    raw_scores = samples.transform.to_raw(samples.scores)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# fairpost {__version__} master_seed={args.seed}\n")
        fh.write("group,score,prediction\n")
        for (g, _), y, p in zip(rows, raw_scores, raw):
            fh.write(f"{g},{float(y)!r},{float(p)!r}\n")
    print(f"wrote {len(rows)} predictions to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    model = pipeline.load(args.model)
    schema = _load_schema(args.schema)
    samples = load_csv(args.data, schema)
    if samples.labels is None:
        raise DataError("evaluate requires labeled data")
    rng = np.random.default_rng(args.seed)
    rows = list(zip((samples.groups[i] for i in samples.group_idx), samples.scores))
    preds = model.predict_batch(rows, rng)
    tr = samples.transform
    report = {
        "n": samples.n,
        "mse_raw": mse(tr.to_raw(preds), tr.to_raw(samples.labels)),
        "mse_norm": mse(preds, samples.labels),
        "delta_sp": statistical_parity_gap(
            {g: preds[samples.group_idx == i] for i, g in enumerate(samples.groups)},
            model.grid),
        "out_of_range": model.out_of_range_count,
    }
    payload = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    print(payload, end="")
    return 0


def _sweep_config(args) -> sweep.SweepConfig:
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    try:
        schema_doc = doc.get("schema")
        if isinstance(schema_doc, str):
            schema = _load_schema(schema_doc)
        elif schema_doc is None:
            schema = DatasetSchema()
        else:
            schema = DatasetSchema(
                group_col=schema_doc.get("group", "group"),
                score_col=schema_doc.get("score", "score"),
                label_col=schema_doc.get("label", "label"),
                interval=tuple(schema_doc.get("interval", (0.0, 1.0))),
                normalization=schema_doc.get("normalization", "none"),
                delimiter=schema_doc.get("delimiter", ","),
            )
        to_num = lambda x: math.inf if x == "inf" else float(x)
        return sweep.SweepConfig(
            data_path=doc["data"],
            schema=schema,
            alphas=tuple(to_num(a) for a in doc["alphas"]),
            ks=tuple(int(k) for k in doc["ks"]),
            epsilons=tuple(to_num(e) for e in doc["epsilons"]),
            seeds=int(doc.get("seeds", 50)),
            split_ratio=float(doc.get("split_ratio", 0.7)),
            master_seed=args.seed if args.seed is not None else int(doc.get("master_seed", 0)),
            workers=args.workers,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config {args.config}: {exc}") from exc


def _cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    finite_eps_fits = sum(1 for _, _, _, eps, _ in sweep.cell_specs(cfg)
                          if not math.isinf(eps))
    if finite_eps_fits > 1 and not args.allow_budget_reuse:
        raise ConfigError(
            f"this sweep spends the privacy budget {finite_eps_fits} times on "
            f"{cfg.data_path}; pass --allow-budget-reuse to acknowledge")
    os.makedirs(args.out, exist_ok=True)
    rows = sweep.run_sweep(cfg)
    aggs = sweep.aggregate(rows)
    sweep.write_results_csv(os.path.join(args.out, "results.csv"), rows, cfg.master_seed)
    sweep.write_aggregates_csv(os.path.join(args.out, "aggregates.csv"), aggs, cfg.master_seed)
    sweep.write_envelope_csv(os.path.join(args.out, "envelope.csv"), aggs, cfg.master_seed)
    sweep.write_timings_csv(os.path.join(args.out, "timings.csv"), rows, cfg.master_seed)
    failures = sum(1 for r in rows if r.status != "ok")
    print(f"swept {len(rows)} cells ({failures} failed) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairpost",
                                description="Private post-processing for fair regression")
    p.add_argument("--version", action="version", version=f"fairpost {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a post-processing model")
    f.add_argument("--data", required=True)
    f.add_argument("--schema", default=None, help="schema JSON (default: canonical columns)")
    f.add_argument("--k", type=int, required=True, help="number of bins")
    f.add_argument("--alpha", required=True, help="parity tolerance (number or 'inf')")
    f.add_argument("--epsilon", required=True, help="privacy budget (number or 'inf')")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True, help="model JSON output path")
    f.add_argument("--dump-lp", default=None, help="also dump the LP instance as text")
    f.set_defaults(func=_cmd_fit)

    a = sub.add_parser("apply", help="post-process scores with a fitted model")
    a.add_argument("--model", required=True)
    a.add_argument("--data", required=True)
    a.add_argument("--schema", default=None)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--mode", choices=("sample", "barycentric"), default="sample",
                   help="barycentric is deterministic but voids the parity guarantee")
    a.add_argument("--out", required=True)
    a.set_defaults(func=_cmd_apply)

    e = sub.add_parser("evaluate", help="report MSE and parity gap on labeled data")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--schema", default=None)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=None)
    e.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("sweep", help="run a hyperparameter sweep from a config JSON")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--allow-budget-reuse", action="store_true",
                   help="acknowledge spending the privacy budget once per cell")
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, UnknownGroupError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except SolverFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
