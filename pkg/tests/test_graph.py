import math

import numpy as np
import pytest

from lpp.chainbounds import bounds_C
from lpp.euler import euler_phi, skeleton_rate
from lpp.graph import (
    EdgeLaw,
    GraphWindow,
    clt_experiment,
    gap_event_occurs,
    gap_moment_diagnostic,
    heavy_edge_exponent,
    heavy_tail_scaling,
    longest_path_profile,
    max_charge_profile,
    next_skeleton_point,
    sample_next_skeleton_point,
    sample_window,
    skeleton_gap_pmf,
    skeleton_points,
    window_longest_via_bins,
)
from lpp.harness import InvalidParameterError, RngStream


# ---------------------------------------------------------------------------
# brute-force oracles

def brute_profiles(w: GraphWindow):
    """(longest ending at j, best charge 0 -> j) by path enumeration."""
    n = w.n
    best_len = [0] * (n + 1)

    def dfs_len(v, length):
        best_len[v] = max(best_len[v], length)
        for u in range(v + 1, n + 1):
            if w.has_edge(v, u):
                dfs_len(u, length + 1)

    for s in range(n + 1):
        dfs_len(s, 0)

    best_charge = [-math.inf] * (n + 1)
    best_charge[0] = 0.0

    def dfs_charge(v, total):
        best_charge[v] = max(best_charge[v], total)
        for u in range(v + 1, n + 1):
            c = w.charge(v, u)
            if c != -math.inf:
                dfs_charge(u, total + c)

    dfs_charge(0, 0.0)
    return best_len, best_charge


def brute_skeleton(w: GraphWindow):
    n = w.n
    reach = [[False] * (n + 1) for _ in range(n + 1)]
    for i in range(n, -1, -1):
        for j in range(i + 1, n + 1):
            if w.has_edge(i, j):
                reach[i][j] = True
                for k in range(n + 1):
                    reach[i][k] = reach[i][k] or reach[j][k]
    return [
        v
        for v in range(n + 1)
        if all(reach[u][v] for u in range(v)) and all(reach[v][u] for u in range(v + 1, n + 1))
    ]


def all_max_length_paths(w: GraphWindow):
    """Every path achieving the window-maximal edge count."""
    n = w.n
    best = {"len": 0, "paths": [()]}

    def dfs(path):
        length = len(path) - 1
        if length > best["len"]:
            best["len"], best["paths"] = length, [tuple(path)]
        elif length == best["len"] and length > 0:
            best["paths"].append(tuple(path))
        for u in range(path[-1] + 1, n + 1):
            if w.has_edge(path[-1], u):
                dfs(path + [u])

    for s in range(n + 1):
        dfs([s])
    return best["len"], best["paths"]


# ---------------------------------------------------------------------------
# sampling and dynamic programming

def test_complete_and_empty_windows():
    w = sample_window(5, EdgeLaw.bernoulli(1.0), RngStream(1))
    assert sum(w.in_mask(j).sum() for j in range(1, 6)) == 15
    assert longest_path_profile(w)[5] == 5
    w0 = sample_window(5, EdgeLaw.bernoulli(0.0), RngStream(1))
    assert longest_path_profile(w0) == [0] * 6
    with pytest.raises(InvalidParameterError):
        sample_window(0, EdgeLaw.bernoulli(0.5), RngStream(1))


def test_edge_density():
    reps, n, p = 200, 100, 0.5
    total = 0
    pairs = n * (n + 1) // 2
    for r in range(reps):
        w = sample_window(n, EdgeLaw.bernoulli(p), RngStream(2, r))
        total += sum(int(w.in_mask(j).sum()) for j in range(1, n + 1))
    density = total / (reps * pairs)
    se = math.sqrt(p * (1 - p) / (reps * pairs))
    assert abs(density - p) < 3 * se


def test_profiles_against_enumeration():
    for seed in range(6):
        w = sample_window(9, EdgeLaw.bernoulli(0.45), RngStream(3, seed))
        blen, _ = brute_profiles(w)
        assert longest_path_profile(w) == blen
    for seed in range(6):
        w = sample_window(8, EdgeLaw.two_atom(0.5, -0.7), RngStream(4, seed))
        _, bch = brute_profiles(w)
        got = max_charge_profile(w)
        assert np.allclose(got, bch)


def test_single_vertex_profile_convention():
    w = sample_window(1, EdgeLaw.two_atom(0.5, 0.0), RngStream(5))
    assert max_charge_profile(w)[0] == 0.0


def test_all_ones_charges():
    w = sample_window(12, EdgeLaw.two_atom(1.0, 0.0), RngStream(6))
    assert max_charge_profile(w)[12] == 12.0


def test_monotone_under_edge_addition():
    w = sample_window(10, EdgeLaw.bernoulli(0.3), RngStream(7))
    before = longest_path_profile(w)
    # add the first missing edge
    for i in range(10):
        for j in range(i + 1, 11):
            if not w.has_edge(i, j):
                w.presence[i, j] = True
                after = longest_path_profile(w)
                assert all(a >= b for a, b in zip(after, before))
                return


def test_superadditivity_of_charges():
    for seed in range(5):
        w = sample_window(10, EdgeLaw.two_atom(0.5, -0.4), RngStream(8, seed))
        n = w.n
        # W[a][b]: best charge over paths tied to both endpoints
        W = np.full((n + 1, n + 1), -math.inf)
        for a in range(n + 1):
            W[a, a] = 0.0
            for b in range(a + 1, n + 1):
                W[a, b] = max(W[a, i] + w.charge(i, b) for i in range(a, b))
        for a in range(n + 1):
            for mid in range(a + 1, n + 1):
                for b in range(mid + 1, n + 1):
                    assert W[a, b] >= W[a, mid] + W[mid, b] - 1e-9


def test_two_atom_rate_matches_closed_form():
    from lpp.charged import c_at_zero

    vals = []
    for r in range(50):
        w = sample_window(2000, EdgeLaw.two_atom(0.5, 0.0), RngStream(9, r))
        vals.append(max_charge_profile(w)[2000] / 2000)
    assert abs(np.mean(vals) - c_at_zero(0.5)) / c_at_zero(0.5) < 0.05


# ---------------------------------------------------------------------------
# skeleton

def test_skeleton_complete_graph():
    w = sample_window(8, EdgeLaw.bernoulli(1.0), RngStream(10))
    assert skeleton_points(w).points == list(range(9))


def test_skeleton_matches_brute_force():
    for seed in range(10):
        w = sample_window(12, EdgeLaw.bernoulli(0.5), RngStream(11, seed))
        assert skeleton_points(w).points == brute_skeleton(w)


def test_skeleton_density_large_window():
    n, trim = 10**4, 50
    w = sample_window(n, EdgeLaw.bernoulli(0.5), RngStream(12))
    pts = [v for v in skeleton_points(w).points if trim <= v <= n - trim]
    gaps = np.diff(pts)
    density = len(pts) / (n - 2 * trim + 1)
    lam = skeleton_rate(0.5)
    # renewal counts: var ~ width * lambda^3 * var(gap)
    sigma = math.sqrt(lam**3 * gaps.var() * (n - 2 * trim)) / (n - 2 * trim)
    assert abs(density - lam) < 3 * sigma


def test_skeleton_mean_gap_dense_window():
    n, trim = 10**4, 10
    w = sample_window(n, EdgeLaw.bernoulli(0.9), RngStream(13))
    pts = [v for v in skeleton_points(w).points if trim <= v <= n - trim]
    gaps = np.diff(pts)
    se = gaps.std(ddof=1) / math.sqrt(len(gaps))
    assert abs(gaps.mean() - 1.26) < 3 * se + 0.005


def test_skeleton_factorization_on_small_windows():
    """Maximal-length paths spanning a skeleton point pass through it."""
    for seed in range(12):
        w = sample_window(11, EdgeLaw.bernoulli(0.6), RngStream(14, seed))
        pts = skeleton_points(w).points
        _, paths = all_max_length_paths(w)
        for path in paths:
            if len(path) < 2:
                continue
            for v in pts:
                if path[0] < v < path[-1]:
                    assert v in path, (path, v)


def test_gap_pmf_small_sizes():
    rows = skeleton_gap_pmf(0.5, 3, 4000, seed=15)
    (n1, e1, c1), (n2, e2, c2), (n3, e3, c3) = rows
    assert abs(e1 - 0.5) < 3 * math.sqrt(0.25 / 4000)
    assert e2 == 0.0
    assert abs(e3 - 0.03125) < 3 * math.sqrt(0.03125 * (1 - 0.03125) / 4000) + 1e-9


def test_gap_event_window_of_size_two_never_happens():
    for r in range(50):
        w = sample_window(2, EdgeLaw.bernoulli(0.7), RngStream(16, r))
        assert not gap_event_occurs(w)


# ---------------------------------------------------------------------------
# next skeleton point

def test_next_point_complete_graph():
    law = EdgeLaw.bernoulli(1.0)
    assert all(next_skeleton_point(law, RngStream(17, i)) == 1 for i in range(20))


def test_attempts_are_geometric():
    law = EdgeLaw.bernoulli(0.5)
    sqrt_lam = euler_phi(0.5).value
    N = 20000
    ks = np.array(
        [sample_next_skeleton_point(law, RngStream(18, i)).attempts for i in range(N)]
    )
    for k in (1, 2, 3):
        expect = (1 - sqrt_lam) ** k
        se = math.sqrt(expect * (1 - expect) / N)
        assert abs((ks > k).mean() - expect) < 3 * se, k


def test_conditioned_gap_mean():
    law = EdgeLaw.bernoulli(0.5)
    N = 20000
    gaps = np.array(
        [
            sample_next_skeleton_point(law, RngStream(19, i), condition_on_origin=True).vertex
            for i in range(N)
        ],
        dtype=float,
    )
    se = gaps.std(ddof=1) / math.sqrt(N)
    assert abs(gaps.mean() - 1.0 / skeleton_rate(0.5)) < 3 * se


# ---------------------------------------------------------------------------
# CLT experiment

def test_clt_degenerate_at_full_connectivity():
    rep = clt_experiment(1.0, 1000, 10, seed=20)
    assert rep.degenerate and rep.sigma2 == 0.0


def test_window_longest_via_bins_matches_complete_graph():
    assert window_longest_via_bins(50, 1.0, RngStream(21).generator()) == 49


@pytest.mark.slow
def test_clt_statistic_below_critical_value():
    rep = clt_experiment(0.5, 50000, 500, seed=22)
    assert rep.sigma2 > 0.0
    assert rep.ks_stat < rep.ks_threshold


# ---------------------------------------------------------------------------
# heavy-tailed weights

@pytest.mark.slow
def test_heaviest_edge_exponent_slopes():
    grid = [2**e for e in range(8, 15)]
    rep4 = heavy_edge_exponent(4.0, grid, reps=12, seed=23)
    assert abs(rep4.slope - 1.0 / 3.0) < 0.1
    rep3 = heavy_edge_exponent(3.0, grid, reps=12, seed=24)
    assert abs(rep3.slope - 0.5) < 0.1


def test_heaviest_edge_requires_unique_geodesic():
    # all-zero weights tie every path; all-equal positive weights would
    # still single out the full chain, so zero is the degenerate case
    constant = lambda gen, size: np.zeros(size)
    with pytest.raises(InvalidParameterError):
        heavy_edge_exponent(4.0, [16], reps=1, seed=25, weight_sampler=constant)


def test_heavy_tail_scaling_positive_and_stable():
    s1 = heavy_tail_scaling(1.0, 500, 1000, seed=26)
    assert (s1 >= 0).all()
    s2 = heavy_tail_scaling(1.0, 1000, 1000, seed=27)
    # two-sample KS distance between the rescaled laws stays small
    combined = np.sort(np.concatenate([s1, s2]))
    cdf1 = np.searchsorted(np.sort(s1), combined, side="right") / s1.size
    cdf2 = np.searchsorted(np.sort(s2), combined, side="right") / s2.size
    assert np.abs(cdf1 - cdf2).max() < 0.1


def test_heavy_tail_smallest_window_matches_enumeration():
    gen = RngStream(28).generator()
    # replicate the sampler's draw order for n = 2: columns j = 1 then j = 2
    u01 = gen.pareto(1.0, (3, 1)) + 1.0
    u_col2 = gen.pareto(1.0, (3, 2)) + 1.0
    w2 = np.maximum(u_col2[:, 0], u01[:, 0] + u_col2[:, 1])
    b2 = 3.0  # 3 edges, unit Pareto quantile 3^(1/1)
    assert np.allclose(heavy_tail_scaling(1.0, 2, 3, seed=28), w2 / b2)


# ---------------------------------------------------------------------------
# gap-moment diagnostic

def test_gap_moment_constant_law_is_stable():
    rep = gap_moment_diagnostic(0.5, 2, reps=4000, seed=29)
    assert rep.series_finite and rep.flag == "ok"
    assert rep.stable


def test_gap_moment_divergent_series_flagged():
    probs = lambda d: min(1.0, 0.5 / d**2)
    rep = gap_moment_diagnostic(probs, 2, reps=100, seed=30)
    assert not rep.series_finite
    assert rep.flag == "divergent-series"


def test_gap_moment_complete_graph():
    rep = gap_moment_diagnostic(1.0, 3, reps=10, seed=31)
    assert rep.moment_small == 1.0 and rep.moment_large == 1.0 and rep.stable
