"""Randomized post-processing maps read off the optimal couplings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barycenter_lp import BarycenterSolution
from .dp_estimation import PrivateGroupDists
from .grid import Grid


@dataclass(frozen=True)
class TransportKernels:
    """Per-group k x k row-stochastic maps: entry (j, l) is the probability
    of sending bin j to bin l."""

    matrices: np.ndarray  # (n_groups, k, k)

    @property
    def n_groups(self) -> int:
        return self.matrices.shape[0]

    @property
    def k(self) -> int:
        return self.matrices.shape[1]


def extract_kernels(sol: BarycenterSolution, dists: PrivateGroupDists) -> TransportKernels:
    """Row j of group a is the coupling row divided by its input mass;
    bins carrying no input mass keep the identity row.  Rows are
    renormalized after the division to absorb float dust."""
    n_groups, k, _ = sol.couplings.shape
    if dists.n_groups != n_groups or dists.k != k:
        raise ValueError("solution and distributions disagree on shape")
    out = np.zeros_like(sol.couplings)
    for a in range(n_groups):
        np.fill_diagonal(out[a], 1.0)
        for j in range(k):
            if dists.pmfs[a, j] > 0.0:
                row = np.clip(sol.couplings[a, j], 0.0, None)
                total = row.sum()
                if total > 0.0:
                    out[a, j] = row / total
    return TransportKernels(matrices=out)


def push_forward(kern: TransportKernels, a: int, pmf: np.ndarray) -> np.ndarray:
    """Distribution of the kernel output when bin indices are drawn from
    ``pmf``: output mass at l is sum_j pmf[j] * kern[a][j, l]."""
    pmf = np.asarray(pmf, dtype=float)
    if len(pmf) != kern.k:
        raise ValueError(f"pmf has length {len(pmf)}, kernels have k={kern.k}")
    return pmf @ kern.matrices[a]


def apply_sample(kern: TransportKernels, a: int, j: int,
                 rng: np.random.Generator) -> int:
    """Draw an output bin from row j of group a by inverse-CDF on one
    uniform; deterministic given the stream state."""
    row = kern.matrices[a, j]
    cdf = np.cumsum(row)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, kern.k - 1)


def row_means(kern: TransportKernels, grid: Grid) -> np.ndarray:
    """Mean output value per input bin: sum_l kern[a][j, l] * v_l.

    This is the deterministic "barycentric" read-out of the kernels; note
    that using it instead of sampling changes the output distribution, so
    the statistical-parity guarantee no longer applies.
    """
    return kern.matrices @ grid.midpoints
