import math
from itertools import combinations

import numpy as np
import pytest

from lpp.harness import InvalidParameterError, ResourceError, RngStream
from lpp.pwit import (
    brw_min_displacement,
    coupled_tree,
    dense_rate_root,
    sample_sparse_edges,
    shortest_path,
    simulate_pwit,
    sparse_length_threshold,
    sparse_longest,
)


def test_pwit_starts_with_the_root():
    s = simulate_pwit(0.0, RngStream(1))
    assert s.counts == [1] and s.population == 1 and s.front == 0


def test_pwit_population_cap():
    with pytest.raises(ResourceError):
        simulate_pwit(30.0, RngStream(2), population_cap=1000)


def test_pwit_generation_and_population_means():
    reps = 4000
    z = np.empty(reps)
    v = np.empty(reps)
    for r in range(reps):
        s = simulate_pwit(2.0, RngStream(3, r))
        z[r] = s.counts[3] if len(s.counts) > 3 else 0
    for r in range(reps):
        s = simulate_pwit(3.0, RngStream(4, r))
        v[r] = s.population
    target_z = 2.0**3 / math.factorial(3)
    assert abs(z.mean() - target_z) < 3 * z.std(ddof=1) / math.sqrt(reps)
    assert abs(v.mean() - math.e**3) < 3 * v.std(ddof=1) / math.sqrt(reps)


def test_front_and_first_birth_are_inverse():
    for r in range(200):
        s = simulate_pwit(2.5, RngStream(5, r))
        # the front is the largest generation whose first birth is <= t
        assert s.front == len(s.first_birth) - 1
        assert all(b <= s.time for b in s.first_birth)
        assert all(a < b for a, b in zip(s.first_birth, s.first_birth[1:]))


def test_brw_first_generation_is_exponential():
    reps = 10**4
    vals = np.array([brw_min_displacement(1, 100, RngStream(6, r)) for r in range(reps)])
    assert abs(vals.mean() - 1.0) < 3 * vals.std(ddof=1) / math.sqrt(reps)


@pytest.mark.slow
def test_brw_speed_band_and_beam_monotonicity():
    n = 2000
    m_large = np.array([brw_min_displacement(n, 10**4, RngStream(7, r)) / n for r in range(3)])
    assert ((1 / math.e <= m_large) & (m_large <= 1 / math.e + 0.05)).all()
    m_small = np.array([brw_min_displacement(n, 10**2, RngStream(8, r)) / n for r in range(6)])
    # a wider beam can only speed the front up (allow two joint sigmas)
    se = math.sqrt(m_small.var(ddof=1) / m_small.size + m_large.var(ddof=1) / m_large.size)
    assert m_large.mean() <= m_small.mean() + 2 * se


# ---------------------------------------------------------------------------
# red/blue coupling

def test_coupled_tree_complete_graph_limit():
    # as p -> 1 the parent is always the newest vertex: depth = index
    traj = coupled_tree(1.0 - 1e-12, 200, RngStream(9))
    assert np.array_equal(traj.generations, np.arange(201))
    assert np.array_equal(traj.kappa, np.arange(201))


def test_coupled_tree_first_gap_geometric():
    reps = 4000
    gaps = np.array([coupled_tree(0.5, 1, RngStream(10, r)).kappa[1] for r in range(reps)])
    se = gaps.std(ddof=1) / math.sqrt(reps)
    assert abs(gaps.mean() - 2.0) < 3 * se


def test_coupled_tree_front_growth_matches_direct_estimate():
    from lpp.graph import window_longest_via_bins

    steps = 20000
    rates = np.array(
        [coupled_tree(0.5, steps, RngStream(11, r)).front[-1] / steps for r in range(6)]
    )
    direct = np.array(
        [window_longest_via_bins(steps, 0.5, RngStream(12, r).generator()) / steps for r in range(6)]
    )
    se = math.sqrt(rates.var(ddof=1) / 6 + direct.var(ddof=1) / 6)
    assert abs(rates.mean() - direct.mean()) <= 3 * se + 1e-9


# ---------------------------------------------------------------------------
# sparse regime

def test_sparse_edges_complete():
    i, j = sample_sparse_edges(9, 1.0, RngStream(13).generator())
    assert set(zip(i.tolist(), j.tolist())) == set(combinations(range(9), 2))


def test_sparse_longest_matches_enumeration_on_small_windows():
    from lpp.graph import EdgeLaw, longest_path_profile, sample_window

    # same law, two routes: sparse edge-list DP vs dense window DP
    n, p, reps = 12, 0.3, 2000
    sparse = sparse_longest(n, p, reps, seed=14)
    dense_counts: dict[int, int] = {}
    for r in range(reps):
        w = sample_window(n - 1, EdgeLaw.bernoulli(p), RngStream(15, r))
        l = max(longest_path_profile(w))
        dense_counts[l] = dense_counts.get(l, 0) + 1
    for k in set(sparse.counts) | set(dense_counts):
        a = sparse.counts.get(k, 0) / reps
        b = dense_counts.get(k, 0) / reps
        se = math.sqrt((a * (1 - a) + b * (1 - b)) / reps) + 1e-9
        assert abs(a - b) < 4 * se, (k, a, b)


def test_sparse_longest_empty_regime():
    # n^2 p -> 0: no edges at all with probability -> 1
    n = 10**4
    p = n**-2.5
    rep = sparse_longest(n, p, 400, seed=16)
    assert rep.probability(0) > 1.0 - n**2 * p - 0.05


def test_sparse_longest_boundary_regime_law():
    # p = theta n^(-3/2): P(L <= 1) -> exp(-theta^2/6)
    n, theta, reps = 2000, 1.0, 1500
    p = theta * n**-1.5
    rep = sparse_longest(n, p, reps, seed=17)
    expect = math.exp(-(theta**2) / 6.0)
    got = rep.probability(0) + rep.probability(1)
    se = math.sqrt(expect * (1 - expect) / reps)
    assert abs(got - expect) < 3 * se + 0.02  # Poisson-approximation slack


def test_length_threshold_definition():
    for n, p in [(100, 0.05), (1000, 0.01), (50, 0.3)]:
        k = sparse_length_threshold(n, p)
        assert math.comb(n, k) * p**k <= 1.0 + 1e-9
        assert math.comb(n, k + 1) * p ** (k + 1) > 1.0


def test_dense_rate_root():
    x = dense_rate_root(0.5)
    assert abs(x * math.log(x) - 1.0 / (math.e * 0.5)) < 1e-10
    assert x > 1.0
    assert sparse_longest(100, 0.5 * math.log(100) / 100, 10, seed=18).rate_root is not None


# ---------------------------------------------------------------------------
# shortest path

def test_shortest_path_complete():
    law = shortest_path(10, 1.0, 50, seed=19)
    assert law == {1.0: 1.0}


def test_shortest_path_small_window_law():
    n, p, reps = 10, 0.3, 20000
    law = shortest_path(n, p, reps, seed=20)
    p1, p2 = law.get(1.0, 0.0), law.get(2.0, 0.0)
    expect2 = (1 - p) * (1 - (1 - p**2) ** (n - 2))
    assert abs(p1 - p) < 3 * math.sqrt(p * (1 - p) / reps)
    assert abs(p2 - expect2) < 3 * math.sqrt(expect2 * (1 - expect2) / reps)


def test_shortest_path_sparse_switchover_consistent():
    dense = shortest_path(1500, 0.002, 600, seed=21)
    sparse = shortest_path(2500, 0.002, 600, seed=21)
    # both should be concentrated on {2, 3} at these sizes
    assert sum(v for k, v in dense.items() if k in (2.0, 3.0)) > 0.9
    assert sum(v for k, v in sparse.items() if k in (2.0, 3.0)) > 0.9
