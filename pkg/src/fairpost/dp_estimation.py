"""Private estimation of per-group output distributions.

Pipeline: empirical joint PMF over (group, bin) -> per-entry Laplace noise
-> clipped group weights -> scaled partial sums -> sup-norm isotonic
regression and clipping to a valid CDF -> first differences back to a PMF.

This module is the only place in the repository that reads raw sample
values on the fitting path; everything downstream consumes the private
estimates, so privacy is preserved under post-processing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_io import GroupedSamples
from .grid import Grid, discretize_many


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and the sample count the noise scale is calibrated to.

    ``epsilon`` may be +inf, which disables the noise entirely.
    """

    epsilon: float
    n: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive (or inf), got {self.epsilon}")
        if self.n < 1:
            raise ValueError(f"sample count must be >= 1, got {self.n}")

    @property
    def noise_scale(self) -> float:
        """Laplace scale 2 / (n * epsilon); the empirical joint PMF has
        L1 sensitivity at most 2/n under substitution, insertion, or
        deletion of one row."""
        if math.isinf(self.epsilon):
            return 0.0
        return 2.0 / (self.n * self.epsilon)


@dataclass(frozen=True)
class PrivateGroupDists:
    """Per-group clipped weights, valid conditional PMFs, and their CDFs."""

    weights: np.ndarray   # (n_groups,), nonnegative
    pmfs: np.ndarray      # (n_groups, k), rows nonnegative and summing to 1
    cdfs: np.ndarray      # (n_groups, k), rows nondecreasing in [0, 1], last entry 1

    @property
    def n_groups(self) -> int:
        return len(self.weights)

    @property
    def k(self) -> int:
        return self.pmfs.shape[1]


def empirical_joint(samples: GroupedSamples, grid: Grid) -> np.ndarray:
    """Empirical joint PMF over (group, bin): entry (a, j) is the fraction
    of rows with group a whose score discretizes to bin j."""
    if samples.n == 0:
        raise ValueError("empty input: need at least one sample")
    bins = discretize_many(grid, samples.scores)
    counts = np.bincount(samples.group_idx * grid.k + bins,
                         minlength=len(samples.groups) * grid.k)
    return counts.reshape(len(samples.groups), grid.k) / samples.n


def _laplace_from_uniform(u, scale: float):
    """Inverse-CDF transform of uniform draws into Laplace(0, scale).

    u == 0.0 (probability 2^-53 under a 53-bit stream) is nudged to 2^-54
    so the left tail stays finite.
    """
    u = np.where(np.asarray(u) == 0.0, 2.0 ** -54, u)
    return np.where(u < 0.5,
                    scale * np.log(2.0 * u),
                    -scale * np.log(2.0 * (1.0 - np.minimum(u, 1.0 - 2.0 ** -54))))


def sample_laplace(rng: np.random.Generator, scale: float) -> float:
    """One Laplace(0, scale) draw via inverse-CDF on a single uniform.

    Deterministic given the generator state; no rejection loops.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return float(_laplace_from_uniform(rng.random(), scale))


def sample_laplace_many(rng: np.random.Generator, scale: float, size: int) -> np.ndarray:
    """Vectorized :func:`sample_laplace`; consumes the stream identically to
    ``size`` scalar draws."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return _laplace_from_uniform(rng.random(size), scale)


def privatize_joint(joint: np.ndarray, pp: PrivacyParams,
                    rng: np.random.Generator) -> np.ndarray:
    """Add independent Laplace(0, 2/(n*epsilon)) noise to every entry.

    With epsilon = +inf the input is returned unchanged (and the stream is
    not advanced).  Entries of the result may be negative.
    """
    joint = np.asarray(joint, dtype=float)
    if math.isinf(pp.epsilon):
        return joint.copy()
    noise = sample_laplace_many(rng, pp.noise_scale, joint.size).reshape(joint.shape)
    return joint + noise


def group_weights(noisy_joint: np.ndarray) -> np.ndarray:
    """Private group marginals: row sums clipped at zero."""
    return np.maximum(np.asarray(noisy_joint, dtype=float).sum(axis=1), 0.0)


def isotonic_midrange(values: np.ndarray) -> np.ndarray:
    """Sup-norm isotonic regression of a sequence: the midpoint of the
    running prefix max and suffix min.  O(k); equals the pairwise
    max_{l <= j <= r}(values[l] - values[r]) construction exactly."""
    values = np.asarray(values, dtype=float)
    prefix_max = np.maximum.accumulate(values)
    suffix_min = np.minimum.accumulate(values[::-1])[::-1]
    return 0.5 * (prefix_max + suffix_min)


def renormalize_cdf(row: np.ndarray, weight: float) -> tuple[np.ndarray, np.ndarray]:
    """Turn one noisy joint-PMF row into a valid (CDF, PMF) pair.

    Scaled partial sums are made nondecreasing by sup-norm isotonic
    regression, clipped into [0, 1], and forced to end at 1; the PMF is the
    first difference.  ``weight == 0`` (noise wipeout or an empty group)
    treats the partial sums as identically zero, which yields the point
    mass at the last bin.
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or len(row) == 0:
        raise ValueError("row must be a nonempty 1-D vector")
    if weight < 0:
        raise ValueError(f"weight must be nonnegative, got {weight}")
    if weight > 0:
        with np.errstate(over="ignore"):
            partial = np.cumsum(row) / weight
        # a tiny weight can overflow the division; finite stand-ins keep the
        # isotonic midrange well defined and the clip below does the rest
        partial = np.nan_to_num(partial, nan=0.0, posinf=1e300, neginf=-1e300)
    else:
        partial = np.zeros(len(row))
    cdf = np.clip(isotonic_midrange(partial), 0.0, 1.0)
    cdf[-1] = 1.0
    pmf = np.diff(cdf, prepend=0.0)
    return cdf, pmf


def estimate_private_dists(samples: GroupedSamples, grid: Grid, pp: PrivacyParams,
                           rng: np.random.Generator) -> PrivateGroupDists:
    """Full private-estimation pass: empirical joint, Laplace mechanism,
    clipped weights, per-group CDF renormalization."""
    if pp.n != samples.n:
        raise ValueError(f"PrivacyParams.n = {pp.n} does not match sample count {samples.n}")
    joint = empirical_joint(samples, grid)
    noisy = privatize_joint(joint, pp, rng)
    weights = group_weights(noisy)
    cdfs = np.empty_like(noisy)
    pmfs = np.empty_like(noisy)
    for a in range(len(samples.groups)):
        cdfs[a], pmfs[a] = renormalize_cdf(noisy[a], weights[a])
    return PrivateGroupDists(weights=weights, pmfs=pmfs, cdfs=cdfs)
