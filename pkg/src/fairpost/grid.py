"""Fixed discretization of a target interval into bin midpoints."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform bins on [s, t]; ``midpoints[j] = s + (j + 1/2) * (t - s) / k``."""

    s: float
    t: float
    k: int
    midpoints: np.ndarray = field(repr=False)

    @property
    def width(self) -> float:
        return (self.t - self.s) / self.k


def make_grid(s: float, t: float, k: int) -> Grid:
    """Build a k-bin grid on [s, t].

    Raises ValueError for an invalid interval (s >= t) or bin count (k < 1).
    """
    s, t = float(s), float(t)
    if not s < t:
        raise ValueError(f"invalid interval: need s < t, got [{s}, {t}]")
    if k < 1:
        raise ValueError(f"invalid bin count: need k >= 1, got {k}")
    midpoints = s + (np.arange(k) + 0.5) * (t - s) / k
    midpoints.setflags(write=False)
    return Grid(s=s, t=t, k=int(k), midpoints=midpoints)


def discretize(grid: Grid, y: float) -> int:
    """Index of the midpoint nearest to y (0-based).

    Ties at bin boundaries break to the lower index; y outside [s, t]
    clamps to the nearest end bin.
    """
    return int(discretize_many(grid, np.asarray([y]))[0])


def discretize_many(grid: Grid, ys: np.ndarray) -> np.ndarray:
    """Vectorized :func:`discretize`."""
    ys = np.asarray(ys, dtype=float)
    mid = grid.midpoints
    hi = np.clip(np.searchsorted(mid, ys), 0, grid.k - 1)
    lo = np.clip(hi - 1, 0, grid.k - 1)
    # tie (equal distance) goes to the lower index
    take_lo = (ys - mid[lo]) <= (mid[hi] - ys)
    return np.where(take_lo, lo, hi)
