"""End-to-end post-processing: fit kernels from grouped scores, predict.

A fitted model is a :class:`FairPostprocessor`: the grid, the group-label
universe, one transport kernel per group, and the fitted diagnostics.  The
raw samples are consumed exactly once, inside the private estimation step;
everything after that depends on the data only through the private
estimates.

Model file format (version 1): a JSON document with the grid, group
labels, kernels (row-major), diagnostics, the affine raw-units transform,
and fit metadata.  Every float is rendered as a 17-significant-digit
decimal string ("inf" for infinity), which round-trips IEEE doubles
bit-exactly and keeps the file valid JSON regardless of the writer.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import barycenter_lp, dp_estimation, transport
from .data_io import AffineTransform, GroupedSamples, IDENTITY_TRANSFORM
from .errors import UnknownGroupError
from .grid import Grid, discretize, make_grid
from .transport import TransportKernels

log = logging.getLogger(__name__)

MODEL_FORMAT = "fairpost-model"
MODEL_VERSION = 1


def _f2s(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def _s2f(s: str) -> float:
    return float(s)


@dataclass
class FairPostprocessor:
    """Fitted fair post-processing model.

    Immutable in spirit after fit; the only mutable member is the
    out-of-range counter bumped when predict sees a score outside the
    fitted interval.
    """

    grid: Grid
    groups: tuple
    kernels: TransportKernels
    alpha: float
    epsilon: float
    seed: int | None
    weights: np.ndarray
    pmfs: np.ndarray
    targets: np.ndarray
    barycenter: np.ndarray
    objective: float
    transform: AffineTransform = IDENTITY_TRANSFORM
    out_of_range_count: int = field(default=0, compare=False)

    def group_index(self, a) -> int:
        try:
            return self.groups.index(a)
        except ValueError:
            raise UnknownGroupError(f"group {a!r} was not present at fit time") from None

    def _note_out_of_range(self, y: float) -> None:
        if self.out_of_range_count == 0:
            log.warning("score %g outside fitted interval [%g, %g]; clamping",
                        y, self.grid.s, self.grid.t)
        self.out_of_range_count += 1

    def predict(self, a, y: float, rng: np.random.Generator,
                mode: str = "sample") -> float:
        """Post-processed output for one (group, score) pair.

        ``mode="sample"`` draws a bin from the kernel row (the default;
        this is what carries the parity guarantee).  ``mode="barycentric"``
        returns the row's mean output instead: deterministic, but the
        output distribution is no longer the fitted target, so the parity
        guarantee is void.
        """
        idx = self.group_index(a)
        y = float(y)
        if y < self.grid.s or y > self.grid.t:
            self._note_out_of_range(y)
        j = discretize(self.grid, y)
        if mode == "sample":
            return float(self.grid.midpoints[transport.apply_sample(self.kernels, idx, j, rng)])
        if mode == "barycentric":
            return float(self.kernels.matrices[idx, j] @ self.grid.midpoints)
        raise ValueError(f"unknown mode {mode!r}")

    def predict_batch(self, rows, rng: np.random.Generator,
                      mode: str = "sample") -> np.ndarray:
        """Vectorized predict over (group, score) rows, one RNG stream,
        order preserved.  Matches a loop of :meth:`predict` draw for draw.
        Group membership is validated up front so an unknown group is
        reported with its row index before any stream consumption."""
        rows = list(rows)
        for i, (a, _) in enumerate(rows):
            if a not in self.groups:
                raise UnknownGroupError(f"row {i}: group {a!r} was not present at fit time")
        return np.array([self.predict(a, y, rng, mode=mode) for a, y in rows])

    def to_document(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "grid": {"s": _f2s(self.grid.s), "t": _f2s(self.grid.t), "k": self.grid.k,
                     "midpoints": [_f2s(v) for v in self.grid.midpoints]},
            "groups": list(self.groups),
            "kernels": [[_f2s(x) for x in m.ravel()] for m in self.kernels.matrices],
            "fit": {"alpha": _f2s(self.alpha), "epsilon": _f2s(self.epsilon),
                    "k": self.grid.k, "seed": self.seed},
            "transform": {"offset": _f2s(self.transform.offset),
                          "scale": _f2s(self.transform.scale)},
            "diagnostics": {
                "weights": [_f2s(x) for x in self.weights],
                "pmfs": [[_f2s(x) for x in row] for row in self.pmfs],
                "targets": [[_f2s(x) for x in row] for row in self.targets],
                "barycenter": [_f2s(x) for x in self.barycenter],
                "objective": _f2s(self.objective),
            },
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_document(), fh, indent=1)
            fh.write("\n")


def fit(samples: GroupedSamples, interval: tuple[float, float], k: int,
        alpha: float, epsilon: float, rng) -> FairPostprocessor:
    """Fit a fair post-processor on grouped scores.

    ``rng`` may be an integer seed (recorded in the model metadata) or a
    ``numpy.random.Generator``.  The Laplace mechanism is the only
    randomness consumed at fit time.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    seed = None
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    grid = make_grid(interval[0], interval[1], k)
    pp = dp_estimation.PrivacyParams(epsilon=float(epsilon), n=samples.n)
    dists = dp_estimation.estimate_private_dists(samples, grid, pp, rng)
    lp = barycenter_lp.build_lp(dists, grid, alpha)
    sol = barycenter_lp.solve(lp)
    kernels = transport.extract_kernels(sol, dists)
    return FairPostprocessor(
        grid=grid, groups=tuple(samples.groups), kernels=kernels,
        alpha=float(alpha), epsilon=float(epsilon), seed=seed,
        weights=dists.weights, pmfs=dists.pmfs, targets=sol.targets,
        barycenter=sol.barycenter, objective=sol.objective,
        transform=samples.transform,
    )


def load(path) -> FairPostprocessor:
    """Load a model saved by :meth:`FairPostprocessor.save`."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
    g = doc["grid"]
    grid = make_grid(_s2f(g["s"]), _s2f(g["t"]), int(g["k"]))
    saved_mids = np.array([_s2f(x) for x in g["midpoints"]])
    if not np.array_equal(saved_mids, grid.midpoints):
        raise ValueError(f"{path}: stored midpoints disagree with the grid parameters")
    k = grid.k
    kernels = TransportKernels(matrices=np.array(
        [[_s2f(x) for x in flat] for flat in doc["kernels"]]).reshape(-1, k, k))
    d = doc["diagnostics"]
    tr = doc["transform"]
    return FairPostprocessor(
        grid=grid, groups=tuple(doc["groups"]), kernels=kernels,
        alpha=_s2f(doc["fit"]["alpha"]), epsilon=_s2f(doc["fit"]["epsilon"]),
        seed=doc["fit"]["seed"],
        weights=np.array([_s2f(x) for x in d["weights"]]),
        pmfs=np.array([[_s2f(x) for x in row] for row in d["pmfs"]]),
        targets=np.array([[_s2f(x) for x in row] for row in d["targets"]]),
        barycenter=np.array([_s2f(x) for x in d["barycenter"]]),
        objective=_s2f(d["objective"]),
        transform=AffineTransform(offset=_s2f(tr["offset"]), scale=_s2f(tr["scale"])),
    )
