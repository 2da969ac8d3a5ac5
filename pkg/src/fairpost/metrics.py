"""Distances between discrete distributions on a shared grid, the exact
1-D squared-cost transport oracle, MSE, and the statistical-parity gap."""

from __future__ import annotations

import numpy as np

from .grid import Grid, discretize_many

# tolerance for treating a mass vector as a valid PMF
_MASS_ATOL = 1e-9


def as_pmf(masses, k: int | None = None) -> np.ndarray:
    """Validate a probability vector: nonnegative (up to float dust) and
    summing to 1 within 1e-9.  Dust in [-1e-9, 0) is clipped; returns a copy."""
    p = np.asarray(masses, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"expected a 1-D mass vector, got shape {p.shape}")
    if k is not None and len(p) != k:
        raise ValueError(f"mass vector has length {len(p)}, expected {k}")
    if p.min(initial=0.0) < -_MASS_ATOL:
        raise ValueError(f"negative mass {p.min()} in distribution")
    if abs(p.sum() - 1.0) > _MASS_ATOL:
        raise ValueError(f"masses sum to {p.sum()}, expected 1")
    return np.clip(p, 0.0, None)


def _check_pair(p, q):
    p = as_pmf(p)
    q = as_pmf(q)
    if len(p) != len(q):
        raise ValueError(f"mismatched lengths {len(p)} vs {len(q)}")
    return p, q


def ks_distance(p, q) -> float:
    """Kolmogorov-Smirnov distance: max absolute CDF difference on the grid."""
    p, q = _check_pair(p, q)
    return float(np.abs(np.cumsum(p - q)).max())


def l1_distance(p, q) -> float:
    p, q = _check_pair(p, q)
    return float(np.abs(p - q).sum())


def linf_distance(p, q) -> float:
    p, q = _check_pair(p, q)
    return float(np.abs(p - q).max())


def monotone_coupling(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Northwest-corner (quantile) coupling of two mass vectors on sorted
    support.  Exact-tie mass splits advance both pointers, so the result is
    deterministic.  Inputs must share the same total mass up to float dust."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    k = len(p)
    out = np.zeros((k, len(q)))
    i = j = 0
    prem = p[0] if k else 0.0
    qrem = q[0] if len(q) else 0.0
    while i < k and j < len(q):
        m = min(prem, qrem)
        if m > 0.0:
            out[i, j] += m
            prem -= m
            qrem -= m
        if prem <= 1e-15:
            i += 1
            if i < k:
                prem = p[i]
        if qrem <= 1e-15:
            j += 1
            if j < len(q):
                qrem = q[j]
    return out


def w2sq_monotone(p, q, grid: Grid) -> tuple[float, np.ndarray]:
    """Exact squared-W2 transport cost between grid distributions, with the
    optimal coupling.  In 1-D with squared cost the monotone coupling is
    optimal, which makes this an independent oracle for the LP route."""
    p, q = _check_pair(p, q)
    if len(p) != grid.k:
        raise ValueError(f"distributions have length {len(p)}, grid has k={grid.k}")
    # renormalize so both sides carry exactly matching total mass
    p = p / p.sum()
    q = q / q.sum()
    coupling = monotone_coupling(p, q)
    v = grid.midpoints
    cost = float(((v[:, None] - v[None, :]) ** 2 * coupling).sum())
    return cost, coupling


def statistical_parity_gap(outputs_by_group, grid: Grid) -> float:
    """Max pairwise KS distance between per-group empirical output
    distributions, binned on ``grid``.

    ``outputs_by_group`` maps group label -> sequence of outputs (or is a
    sequence of sequences).  Empty groups are skipped; fewer than two
    nonempty groups gives 0.
    """
    if hasattr(outputs_by_group, "values"):
        seqs = list(outputs_by_group.values())
    else:
        seqs = list(outputs_by_group)
    hists = []
    for ys in seqs:
        ys = np.asarray(ys, dtype=float)
        if ys.size == 0:
            continue
        bins = discretize_many(grid, ys)
        hists.append(np.bincount(bins, minlength=grid.k) / ys.size)
    if not hists:
        raise ValueError("all groups empty")
    gap = 0.0
    for i in range(len(hists)):
        for j in range(i + 1, len(hists)):
            gap = max(gap, ks_distance(hists[i], hists[j]))
    return gap


def mse(predictions, labels) -> float:
    """Mean squared error."""
    preds = np.asarray(predictions, dtype=float)
    labs = np.asarray(labels, dtype=float)
    if preds.shape != labs.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labs.shape}")
    if preds.size == 0:
        raise ValueError("empty inputs")
    return float(np.mean((preds - labs) ** 2))
