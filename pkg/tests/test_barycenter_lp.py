import itertools
import math

import numpy as np
import pytest

from fairpost.barycenter_lp import (build_lp, fixed_target_cost, lp_text, solve)
from fairpost.dp_estimation import PrivateGroupDists
from fairpost.errors import SolverFailure
from fairpost.grid import make_grid
from fairpost.metrics import ks_distance, w2sq_monotone


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


def barycenter_objective(pmfs, weights, q, grid):
    """Score a candidate center against the monotone-coupling oracle."""
    return sum(w * w2sq_monotone(p, q, grid)[0] for p, w in zip(pmfs, weights))


def enumerate_simplex(k, denominator):
    """All PMFs on k bins with masses that are multiples of 1/denominator."""
    for cuts in itertools.combinations_with_replacement(range(denominator + 1), k - 1):
        parts = np.diff((0,) + cuts + (denominator,))
        yield parts / denominator


# ---------------------------------------------------------------------- build


def test_variable_and_row_counts():
    g = make_grid(0, 1, 3)
    d = dists_from_pmfs([[1, 0, 0], [0, 0, 1]], [0.5, 0.5])
    lp = build_lp(d, g, 0.1)
    assert lp.n_vars == 2 * 9 + 3 + 2 * 3 == 27
    assert lp.a_eq.shape[0] == 2 * 2 * 3
    assert lp.a_ub.shape[0] == 2 * 2 * 3


def test_infinite_alpha_omits_ks_rows():
    g = make_grid(0, 1, 3)
    d = dists_from_pmfs([[1, 0, 0], [0, 0, 1]])
    lp = build_lp(d, g, math.inf)
    assert lp.a_ub is None and lp.b_ub is None


def test_zero_alpha_keeps_paired_rows_at_zero():
    g = make_grid(0, 1, 3)
    d = dists_from_pmfs([[1, 0, 0], [0, 0, 1]])
    lp = build_lp(d, g, 0.0)
    assert lp.a_ub.shape[0] == 12
    assert (lp.b_ub == 0).all()


def test_negative_alpha_rejected():
    g = make_grid(0, 1, 2)
    with pytest.raises(ValueError):
        build_lp(dists_from_pmfs([[1, 0]]), g, -0.1)


# ---------------------------------------------------------------------- solve


def test_opposed_point_masses_exact_barycenter():
    """Two point masses at the ends, alpha = 0: enumerate every candidate
    center on a 1/8-resolution simplex grid, score each with the transport
    oracle, and confirm the LP lands on the enumerated minimum."""
    g = make_grid(0, 1, 3)
    pmfs = np.array([[1.0, 0, 0], [0, 0, 1.0]])
    weights = np.array([0.5, 0.5])
    sol = solve(build_lp(dists_from_pmfs(pmfs, weights), g, 0.0))

    best_q, best_cost = None, np.inf
    for q in enumerate_simplex(3, 8):
        c = barycenter_objective(pmfs, weights, q, g)
        if c < best_cost:
            best_q, best_cost = q, c
    assert best_cost == pytest.approx(1 / 9)
    assert np.allclose(best_q, [0, 1, 0])
    assert sol.objective == pytest.approx(1 / 9, abs=1e-9)
    assert np.allclose(sol.barycenter, [0, 1, 0], atol=1e-9)
    assert np.allclose(sol.targets, [[0, 1, 0], [0, 1, 0]], atol=1e-9)


def test_identical_groups_zero_objective_identity_couplings():
    g = make_grid(0, 1, 4)
    p = np.array([0.1, 0.4, 0.3, 0.2])
    for alpha in (0.0, 0.2, math.inf):
        sol = solve(build_lp(dists_from_pmfs([p, p]), g, alpha))
        assert sol.objective == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(sol.targets, [p, p], atol=1e-9)
        for a in range(2):
            assert np.allclose(sol.couplings[a], np.diag(p), atol=1e-9)
    # the center itself is pinned only when the KS ball has zero radius
    sol0 = solve(build_lp(dists_from_pmfs([p, p]), g, 0.0))
    assert np.allclose(sol0.barycenter, p, atol=1e-9)


def test_alpha_two_never_binds():
    rng = np.random.default_rng(0)
    g = make_grid(0, 1, 5)
    pmfs = [random_pmf(rng, 5) for _ in range(3)]
    sol = solve(build_lp(dists_from_pmfs(pmfs), g, 2.0))
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(sol.targets, pmfs, atol=1e-7)


def test_infinite_alpha_short_circuit():
    rng = np.random.default_rng(1)
    g = make_grid(0, 1, 4)
    pmfs = [random_pmf(rng, 4) for _ in range(2)]
    sol = solve(build_lp(dists_from_pmfs(pmfs), g, math.inf))
    assert sol.objective == 0.0
    assert np.allclose(sol.targets, pmfs)
    for a in range(2):
        assert np.allclose(sol.couplings[a], np.diag(pmfs[a]))


# ------------------------------------------------------------ oracle bridges


def test_fixed_target_point_mass_cost():
    g = make_grid(0, 1, 3)
    assert fixed_target_cost([1, 0, 0], [0, 0, 1], g) == pytest.approx(4 / 9, abs=1e-9)


def test_fixed_target_identity_zero():
    g = make_grid(0, 1, 3)
    p = [0.2, 0.3, 0.5]
    assert fixed_target_cost(p, p, g) == pytest.approx(0.0, abs=1e-12)


def test_fixed_target_infeasible_mass_mismatch():
    g = make_grid(0, 1, 2)
    with pytest.raises(SolverFailure):
        fixed_target_cost([0.5, 0.5], [0.2, 0.2], g)


def test_fixed_target_matches_oracle_randomized():
    rng = np.random.default_rng(42)
    for _ in range(200):
        k = int(rng.integers(1, 9))
        g = make_grid(0, 1, k)
        p, q = random_pmf(rng, k), random_pmf(rng, k)
        lp_cost = fixed_target_cost(p, q, g)
        oracle_cost, _ = w2sq_monotone(p, q, g)
        assert lp_cost == pytest.approx(oracle_cost, abs=1e-7)


def test_single_group_alpha_zero_matches_oracle():
    """With one group and alpha = 0 the LP reduces to a free-target
    transport, whose optimum is the zero-cost self-coupling."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(1, 9))
        g = make_grid(0, 1, k)
        p = random_pmf(rng, k)
        sol = solve(build_lp(dists_from_pmfs([p], [1.0]), g, 0.0))
        assert sol.objective == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(sol.targets[0], p, atol=1e-7)


def shifted_pair(rng, k, shift):
    """A pmf and its translate by 2*shift bins: the quantile-average
    barycenter sits exactly on the grid, shifted by `shift` bins."""
    core = random_pmf(rng, k - 2 * shift)
    p = np.zeros(k)
    q = np.zeros(k)
    p[:k - 2 * shift] = core
    q[2 * shift:] = core
    return p, q


def test_two_group_quantile_average_barycenter():
    rng = np.random.default_rng(7)
    for _ in range(30):
        k = int(rng.integers(3, 9))
        shift = int(rng.integers(1, k // 2 + 1))
        if k - 2 * shift < 1:
            continue
        g = make_grid(0, 1, k)
        p, q = shifted_pair(rng, k, shift)
        sol = solve(build_lp(dists_from_pmfs([p, q], [0.5, 0.5]), g, 0.0))
        w2, _ = w2sq_monotone(p, q, g)
        assert sol.objective == pytest.approx(0.25 * w2, abs=1e-7)


def test_two_group_point_mass_quantile_average():
    g = make_grid(0, 1, 5)
    p = np.array([0.0, 1.0, 0, 0, 0])
    q = np.array([0.0, 0, 0, 1.0, 0])  # indices 1 and 3 average to 2
    sol = solve(build_lp(dists_from_pmfs([p, q], [0.5, 0.5]), g, 0.0))
    w2, _ = w2sq_monotone(p, q, g)
    assert sol.objective == pytest.approx(0.25 * w2, abs=1e-9)
    assert np.allclose(sol.barycenter, [0, 0, 1, 0, 0], atol=1e-9)


# ----------------------------------------------------------------- invariants


def assert_solution_invariants(lp, sol, alpha):
    for a in range(lp.n_groups):
        assert np.abs(sol.couplings[a].sum(axis=1) - lp.pmfs[a]).max() < 1e-6
        assert np.abs(sol.couplings[a].sum(axis=0) - sol.targets[a]).max() < 1e-6
        if not math.isinf(alpha):
            partial = np.cumsum(sol.targets[a] - sol.barycenter)
            assert np.abs(partial).max() <= alpha / 2 + 1e-6
    for a in range(lp.n_groups):
        for b in range(a + 1, lp.n_groups):
            gap = ks_distance(sol.targets[a] / sol.targets[a].sum(),
                              sol.targets[b] / sol.targets[b].sum())
            assert gap <= min(alpha, 1.0) + 1e-6


def assert_monotone_support(coupling, tol=1e-7):
    # no earlier row may reach past a later row's smallest active column
    running_max = -1
    for j in range(coupling.shape[0]):
        active = np.nonzero(coupling[j] > tol)[0]
        if len(active) == 0:
            continue
        assert running_max <= active.min()
        running_max = max(running_max, active.max())


def test_random_instances_feasible_fair_and_monotone():
    rng = np.random.default_rng(17)
    for trial in range(40):
        k = int(rng.integers(1, 9))
        n_groups = int(rng.integers(1, 4))
        alpha = float(rng.choice([0.0, 0.05, 0.3, 1.0, math.inf]))
        weights = rng.random(n_groups)
        if trial % 5 == 0 and n_groups > 1:
            weights[0] = 0.0  # zero-weight groups stay in the program
        pmfs = [random_pmf(rng, k) for _ in range(n_groups)]
        g = make_grid(0, 1, k)
        lp = build_lp(dists_from_pmfs(pmfs, weights), g, alpha)
        sol = solve(lp)
        assert_solution_invariants(lp, sol, alpha)
        for a in range(n_groups):
            assert_monotone_support(sol.couplings[a])


def test_objective_monotone_in_alpha():
    rng = np.random.default_rng(5)
    g = make_grid(0, 1, 6)
    pmfs = [random_pmf(rng, 6) for _ in range(3)]
    d = dists_from_pmfs(pmfs)
    alphas = [0.0, 0.05, 0.1, 0.3, 0.7, 2.0]
    objectives = [solve(build_lp(d, g, a)).objective for a in alphas]
    for lo, hi in zip(objectives[1:], objectives[:-1]):
        assert lo <= hi + 1e-8


# ------------------------------------------------------------------- lp dump


def test_lp_text_dump_structure():
    g = make_grid(0, 1, 2)
    d = dists_from_pmfs([[0.25, 0.75]], [1.0])
    lp = build_lp(d, g, 0.5)
    text = lp_text(lp)
    assert text.startswith("\\")
    for section in ("Minimize", "Subject To", "Bounds", "End"):
        assert section in text
    for name in ("pi_0_0_0", "pi_0_1_1", "q_0", "qa_0_1"):
        assert name in text
    # marginal row carries the input mass at 12 significant digits
    assert "= 0.25" in text
    assert "<= 0.25" in text  # alpha / 2
