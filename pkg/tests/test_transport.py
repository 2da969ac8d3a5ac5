import math

import numpy as np
import pytest

from fairpost.barycenter_lp import build_lp, solve
from fairpost.dp_estimation import PrivateGroupDists
from fairpost.grid import make_grid
from fairpost.transport import apply_sample, extract_kernels, push_forward, row_means


def dists_from_pmfs(pmfs, weights=None):
    pmfs = np.asarray(pmfs, dtype=float)
    if weights is None:
        weights = np.full(len(pmfs), 1.0 / len(pmfs))
    cdfs = np.cumsum(pmfs, axis=1)
    cdfs[:, -1] = 1.0
    return PrivateGroupDists(weights=np.asarray(weights, dtype=float),
                             pmfs=pmfs, cdfs=cdfs)


def random_pmf(rng, k):
    x = rng.random(k) + 1e-3
    return x / x.sum()


def solved_example():
    """The opposed-point-mass instance with the 1/9 optimum."""
    g = make_grid(0, 1, 3)
    d = dists_from_pmfs([[1.0, 0, 0], [0, 0, 1.0]], [0.5, 0.5])
    return g, d, solve(build_lp(d, g, 0.0))


def test_kernel_rows_from_lp_example():
    _, d, sol = solved_example()
    kern = extract_kernels(sol, d)
    assert np.allclose(kern.matrices[0, 0], [0, 1, 0])
    assert np.allclose(kern.matrices[0, 1], [0, 1, 0])  # zero-mass bin: identity
    assert np.allclose(kern.matrices[0, 2], [0, 0, 1])
    assert np.allclose(kern.matrices[1, 2], [0, 1, 0])


def test_identity_couplings_give_identity_kernels():
    rng = np.random.default_rng(2)
    g = make_grid(0, 1, 4)
    d = dists_from_pmfs([random_pmf(rng, 4), random_pmf(rng, 4)])
    kern = extract_kernels(solve(build_lp(d, g, math.inf)), d)
    for a in range(2):
        assert np.allclose(kern.matrices[a], np.eye(4))


def test_zero_mass_bins_always_identity_rows():
    rng = np.random.default_rng(4)
    g = make_grid(0, 1, 5)
    p = np.array([0.5, 0.0, 0.0, 0.0, 0.5])
    q = random_pmf(rng, 5)
    d = dists_from_pmfs([p, q])
    kern = extract_kernels(solve(build_lp(d, g, 0.2)), d)
    for j in (1, 2, 3):
        row = np.zeros(5)
        row[j] = 1.0
        assert np.array_equal(kern.matrices[0, j], row)


def test_rows_always_stochastic():
    rng = np.random.default_rng(9)
    for trial in range(15):
        k = int(rng.integers(1, 8))
        n_groups = int(rng.integers(1, 4))
        alpha = float(rng.choice([0.0, 0.1, 0.5, math.inf]))
        d = dists_from_pmfs([random_pmf(rng, k) for _ in range(n_groups)],
                            rng.random(n_groups))
        g = make_grid(0, 1, k)
        kern = extract_kernels(solve(build_lp(d, g, alpha)), d)
        sums = kern.matrices.sum(axis=2)
        assert (kern.matrices >= 0).all()
        assert np.abs(sums - 1.0).max() <= 1e-9


def test_push_forward_reaches_targets():
    rng = np.random.default_rng(11)
    for _ in range(10):
        k = int(rng.integers(1, 8))
        n_groups = int(rng.integers(1, 4))
        alpha = float(rng.choice([0.0, 0.15, math.inf]))
        d = dists_from_pmfs([random_pmf(rng, k) for _ in range(n_groups)])
        g = make_grid(0, 1, k)
        sol = solve(build_lp(d, g, alpha))
        kern = extract_kernels(sol, d)
        for a in range(n_groups):
            got = push_forward(kern, a, d.pmfs[a])
            assert np.abs(got - sol.targets[a]).max() <= 1e-9


def test_push_forward_identity_kernel():
    d = dists_from_pmfs([[0.3, 0.7]])
    g = make_grid(0, 1, 2)
    kern = extract_kernels(solve(build_lp(d, g, math.inf)), d)
    p = np.array([0.6, 0.4])
    assert np.allclose(push_forward(kern, 0, p), p)


def test_push_forward_point_mass_reads_row():
    _, d, sol = solved_example()
    kern = extract_kernels(sol, d)
    p = np.zeros(3)
    p[0] = 1.0
    assert np.allclose(push_forward(kern, 0, p), kern.matrices[0, 0])


def test_apply_sample_identity_row():
    _, d, sol = solved_example()
    kern = extract_kernels(sol, d)
    rng = np.random.default_rng(0)
    assert all(apply_sample(kern, 0, 1, rng) == 1 for _ in range(20))


def test_apply_sample_deterministic_row():
    _, d, sol = solved_example()
    kern = extract_kernels(sol, d)  # row 0 of group 0 is (0, 1, 0)
    rng = np.random.default_rng(0)
    assert all(apply_sample(kern, 0, 0, rng) == 1 for _ in range(20))


def test_apply_sample_monte_carlo_frequencies():
    from fairpost.transport import TransportKernels
    kern = TransportKernels(matrices=np.array([[[0.5, 0.5, 0.0],
                                                [0.0, 1.0, 0.0],
                                                [0.0, 0.0, 1.0]]]))
    rng = np.random.default_rng(123)
    draws = np.array([apply_sample(kern, 0, 0, rng) for _ in range(10 ** 5)])
    freq = np.bincount(draws, minlength=3) / len(draws)
    assert np.abs(freq - [0.5, 0.5, 0.0]).max() < 0.01


def test_kernel_row_cdfs_are_ordered_on_mass_bearing_rows():
    """Cumulative kernel rows from monotone couplings are pointwise ordered
    across input bins (restricted to bins carrying input mass)."""
    rng = np.random.default_rng(21)
    for _ in range(10):
        k = int(rng.integers(2, 8))
        d = dists_from_pmfs([random_pmf(rng, k) for _ in range(2)])
        g = make_grid(0, 1, k)
        sol = solve(build_lp(d, g, float(rng.choice([0.0, 0.2]))))
        kern = extract_kernels(sol, d)
        for a in range(2):
            mass_rows = [j for j in range(k) if d.pmfs[a][j] > 0]
            cdfs = np.cumsum(kern.matrices[a], axis=1)
            for lo, hi in zip(mass_rows[:-1], mass_rows[1:]):
                assert (cdfs[lo] >= cdfs[hi] - 1e-9).all()


def test_row_means_barycentric_projection():
    _, d, sol = solved_example()
    kern = extract_kernels(sol, d)
    g = make_grid(0, 1, 3)
    means = row_means(kern, g)
    assert means[0, 0] == pytest.approx(0.5)   # row (0,1,0) -> v_2
    assert means[0, 2] == pytest.approx(5 / 6)  # identity row keeps its midpoint
