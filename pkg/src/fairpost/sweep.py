"""Hyperparameter sweep over (alpha, k, epsilon, seed) with deterministic
cell streams, seed-averaged aggregates, and Pareto lower envelopes.

Cells are enumerated in canonical order (alpha-major, then k, epsilon,
seed).  Each cell owns an RNG stream derived from (master seed, cell
index); the train/test split for a given per-cell seed is shared across
all (alpha, k, epsilon) so settings are compared on identical splits.
Results are written in canonical order regardless of which worker finished
first, so output files are byte-identical across runs.  Fit wall-times are
deliberately kept out of the results file (they cannot be deterministic)
and go to a sidecar timings file instead.
"""

from __future__ import annotations

import concurrent.futures
import math
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .data_io import DatasetSchema, GroupedSamples, load_csv, split_train_test
from .metrics import mse, statistical_parity_gap
from .pipeline import fit


@dataclass(frozen=True)
class SweepConfig:
    data_path: str | None
    schema: DatasetSchema
    alphas: tuple[float, ...]
    ks: tuple[int, ...]
    epsilons: tuple[float, ...]
    seeds: int = 50
    split_ratio: float = 0.7
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not (self.alphas and self.ks and self.epsilons):
            raise ValueError("alpha, k, and epsilon lists must be nonempty")
        if self.seeds < 1:
            raise ValueError(f"need at least one seed, got {self.seeds}")

    @property
    def n_cells(self) -> int:
        return len(self.alphas) * len(self.ks) * len(self.epsilons) * self.seeds


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    k: int
    epsilon: float
    seed: int
    mse_raw: float
    mse_norm: float
    delta_sp: float
    lp_objective: float
    status: str          # "ok" or "error:<ExceptionType>"
    fit_seconds: float


def cell_specs(cfg: SweepConfig):
    """Canonical cell enumeration: (index, alpha, k, epsilon, seed)."""
    i = 0
    for alpha in cfg.alphas:
        for k in cfg.ks:
            for eps in cfg.epsilons:
                for seed in range(cfg.seeds):
                    yield i, alpha, k, eps, seed
                    i += 1


def _split_seed(master_seed: int, seed: int) -> int:
    return int(np.random.SeedSequence((master_seed, 1, seed)).generate_state(1)[0])


def _cell_rng(master_seed: int, cell_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((master_seed, 2, cell_index))))


def run_cell(samples: GroupedSamples, cfg: SweepConfig, cell_index: int,
             alpha: float, k: int, epsilon: float, seed: int) -> SweepRow:
    """Fit one cell on its train split and evaluate on its test split."""
    if samples.labels is None:
        raise ValueError("sweep requires labeled data for test MSE")
    t0 = time.perf_counter()
    try:
        train, test = split_train_test(samples, cfg.split_ratio,
                                       seed=_split_seed(cfg.master_seed, seed))
        rng = _cell_rng(cfg.master_seed, cell_index)
        model = fit(train, cfg.schema.internal_interval, k, alpha, epsilon, rng)
        rows = list(zip((samples.groups[i] for i in test.group_idx), test.scores))
        preds = model.predict_batch(rows, rng)
        tr = samples.transform
        out = SweepRow(
            alpha=alpha, k=k, epsilon=epsilon, seed=seed,
            mse_raw=mse(tr.to_raw(preds), tr.to_raw(test.labels)),
            mse_norm=mse(preds, test.labels),
            delta_sp=statistical_parity_gap(
                {g: preds[test.group_idx == i] for i, g in enumerate(samples.groups)},
                model.grid),
            lp_objective=model.objective,
            status="ok",
            fit_seconds=time.perf_counter() - t0,
        )
    except Exception as exc:  # noqa: BLE001 - per-cell failures must not kill the run
        out = SweepRow(alpha=alpha, k=k, epsilon=epsilon, seed=seed,
                       mse_raw=math.nan, mse_norm=math.nan, delta_sp=math.nan,
                       lp_objective=math.nan,
                       status=f"error:{type(exc).__name__}: {exc}",
                       fit_seconds=time.perf_counter() - t0)
    return out


_WORKER_STATE: dict = {}


def _worker_init(data_path, schema):
    _WORKER_STATE["samples"] = load_csv(data_path, schema)


def _worker_run(args):
    cfg, spec = args
    return run_cell(_WORKER_STATE["samples"], cfg, *spec)


def run_sweep(cfg: SweepConfig, samples: GroupedSamples | None = None) -> list[SweepRow]:
    """Run every cell; per-cell failures are recorded in the row and the
    run continues.  Rows come back in canonical cell order."""
    if samples is None:
        if cfg.data_path is None:
            raise ValueError("config has no data path and no samples were passed")
        samples = load_csv(cfg.data_path, cfg.schema)
    specs = list(cell_specs(cfg))
    if cfg.workers <= 1 or len(specs) == 1:
        return [run_cell(samples, cfg, *spec) for spec in specs]
    if cfg.data_path is None:
        raise ValueError("parallel sweeps need a data path so workers can load the data")
    with concurrent.futures.ProcessPoolExecutor(
            max_workers=cfg.workers, initializer=_worker_init,
            initargs=(cfg.data_path, cfg.schema)) as pool:
        rows = list(pool.map(_worker_run, [(cfg, s) for s in specs], chunksize=4))
    return rows


@dataclass(frozen=True)
class CellAggregate:
    alpha: float
    k: int
    epsilon: float
    n_ok: int
    mse_raw_mean: float
    mse_raw_se: float
    mse_norm_mean: float
    delta_sp_mean: float
    delta_sp_se: float


def aggregate(rows: list[SweepRow]) -> list[CellAggregate]:
    """Seed-averaged metrics per (alpha, k, epsilon) over successful rows."""
    cells: dict[tuple, list[SweepRow]] = {}
    order = []
    for r in rows:
        key = (r.alpha, r.k, r.epsilon)
        if key not in cells:
            cells[key] = []
            order.append(key)
        if r.status == "ok":
            cells[key].append(r)
    out = []
    for key in order:
        ok = cells[key]
        if not ok:
            out.append(CellAggregate(*key, 0, math.nan, math.nan, math.nan,
                                     math.nan, math.nan))
            continue
        mr = np.array([r.mse_raw for r in ok])
        mn = np.array([r.mse_norm for r in ok])
        ds = np.array([r.delta_sp for r in ok])
        n = len(ok)
        se = (lambda x: float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0)
        out.append(CellAggregate(
            alpha=key[0], k=key[1], epsilon=key[2], n_ok=n,
            mse_raw_mean=float(mr.mean()), mse_raw_se=se(mr),
            mse_norm_mean=float(mn.mean()),
            delta_sp_mean=float(ds.mean()), delta_sp_se=se(ds)))
    return out


def lower_envelope(points) -> list[tuple[float, float]]:
    """Pareto-undominated subset of (delta_sp, mse) pairs, sorted by
    delta_sp ascending with mse strictly decreasing.  Duplicates collapse
    to one point."""
    pts = sorted({(float(d), float(m)) for d, m in points})
    if not pts:
        raise ValueError("no points")
    out: list[tuple[float, float]] = []
    best = math.inf
    for d, m in pts:
        if m < best:
            out.append((d, m))
            best = m
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _metadata_line(master_seed: int) -> str:
    return f"# fairpost {__version__} master_seed={master_seed}"


def write_results_csv(path, rows: list[SweepRow], master_seed: int) -> None:
    cols = ["alpha", "k", "epsilon", "seed", "mse_raw", "mse_norm",
            "delta_sp", "lp_objective", "status"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_metadata_line(master_seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for r in rows:
            status = r.status if r.status == "ok" else r.status.replace(",", ";")
            fh.write(",".join([_fmt(r.alpha), _fmt(r.k), _fmt(r.epsilon), _fmt(r.seed),
                               _fmt(r.mse_raw), _fmt(r.mse_norm), _fmt(r.delta_sp),
                               _fmt(r.lp_objective), status]) + "\n")


def write_timings_csv(path, rows: list[SweepRow], master_seed: int) -> None:
    """Wall-times sidecar; not deterministic, hence not in the results file."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_metadata_line(master_seed) + "\n")
        fh.write("alpha,k,epsilon,seed,fit_seconds\n")
        for r in rows:
            fh.write(",".join([_fmt(r.alpha), _fmt(r.k), _fmt(r.epsilon),
                               _fmt(r.seed), _fmt(r.fit_seconds)]) + "\n")


def write_aggregates_csv(path, aggs: list[CellAggregate], master_seed: int) -> None:
    cols = ["alpha", "k", "epsilon", "n_ok", "mse_raw_mean", "mse_raw_se",
            "mse_norm_mean", "delta_sp_mean", "delta_sp_se"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_metadata_line(master_seed) + "\n")
        fh.write(",".join(cols) + "\n")
        for a in aggs:
            fh.write(",".join([_fmt(a.alpha), _fmt(a.k), _fmt(a.epsilon), _fmt(a.n_ok),
                               _fmt(a.mse_raw_mean), _fmt(a.mse_raw_se),
                               _fmt(a.mse_norm_mean), _fmt(a.delta_sp_mean),
                               _fmt(a.delta_sp_se)]) + "\n")


def write_envelope_csv(path, aggs: list[CellAggregate], master_seed: int) -> None:
    """Per-epsilon lower envelopes of the seed-averaged (delta_sp, mse_raw)
    points across the (alpha, k) sweep."""
    epsilons = sorted({a.epsilon for a in aggs})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_metadata_line(master_seed) + "\n")
        fh.write("epsilon,delta_sp,mse_raw\n")
        for eps in epsilons:
            pts = [(a.delta_sp_mean, a.mse_raw_mean) for a in aggs
                   if a.epsilon == eps and a.n_ok > 0 and not math.isnan(a.delta_sp_mean)]
            if not pts:
                continue
            for d, m in lower_envelope(pts):
                fh.write(",".join([_fmt(eps), _fmt(d), _fmt(m)]) + "\n")
