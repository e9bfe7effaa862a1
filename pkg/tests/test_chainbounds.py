import math

import pytest

from lpp.chainbounds import (
    INF_LETTER,
    FiniteMu,
    ProjectedState,
    bounds_C,
    enumerate_states,
    exact_speed,
    lower_bound_mu,
    stationary_distribution,
    transition,
    transition_tables,
    upper_bound_mu,
)
from lpp.harness import InvalidParameterError


def c3_lower(p):
    return (
        p
        * (p**2 - 3 * p + 3) ** 2
        * (p**4 - 6 * p**3 + 14 * p**2 - 16 * p + 8)
        / (3 * p**6 - 26 * p**5 + 96 * p**4 - 196 * p**3 + 235 * p**2 - 158 * p + 47)
    )


def c3_upper(p):
    return (p**3 - 2 * p**2 + p - 1) / (
        p**5 - 4 * p**4 + 8 * p**3 - 9 * p**2 + 6 * p - 3
    )


def test_state_enumeration():
    assert [s.word for s in enumerate_states(2)] == [(), (1,)]
    assert sorted(s.word for s in enumerate_states(3)) == [(), (1,), (1, 1), (2,)]
    assert len(enumerate_states(5)) == 16
    for k in range(2, 9):
        assert len(enumerate_states(k)) == 2 ** (k - 1)
    with pytest.raises(InvalidParameterError):
        enumerate_states(1)
    with pytest.raises(InvalidParameterError):
        enumerate_states(25)


def test_transitions_match_the_small_chain_diagrams():
    empty = ProjectedState((), 3)
    one = ProjectedState((1,), 3)
    two = ProjectedState((2,), 3)
    oneone = ProjectedState((1, 1), 3)
    for xi in (1, 2, 3):
        assert transition(empty, xi) == (one, True)
    assert transition(one, 1) == (oneone, True)
    assert transition(one, 2) == (two, False)
    assert transition(one, 3) == (two, False)
    assert transition(two, 1) == (one, True)
    assert transition(two, 2) == (one, True)
    assert transition(two, 3) == (empty, False)
    assert transition(oneone, 1) == (oneone, True)
    assert transition(oneone, 2) == (two, False)
    assert transition(oneone, 3) == (one, False)
    # shift and infinity are self-loops, moving / not moving the front
    assert transition(two, 0) == (two, True)
    assert transition(two, INF_LETTER) == (two, False)


def test_exact_speed_closed_forms():
    # masses on {1, 2}: v = (mu1 + mu2)^2 / (mu1 + 2 mu2)
    mu = FiniteMu(k=2, masses={1: 0.5, 2: 0.5})
    assert exact_speed(mu) == pytest.approx(2.0 / 3.0, abs=1e-12)
    # the closed form extends to an extra infinity mass (no-move self-loop)
    mu = FiniteMu(k=2, masses={1: 0.5, 2: 0.25, INF_LETTER: 0.25})
    assert exact_speed(mu) == pytest.approx(0.5625, abs=1e-12)


def test_mu_requires_top_mass():
    with pytest.raises(InvalidParameterError):
        FiniteMu(k=2, masses={1: 1.0, 2: 0.0})


def test_stationarity_residual_and_normalization():
    mu = lower_bound_mu(0.37, 7)
    pi = stationary_distribution(mu)
    assert pi.min() >= 0.0
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)


def test_k3_rationals_across_the_grid():
    for p10 in range(1, 10):
        p = p10 / 10
        lo, hi = bounds_C(p, 3)
        assert abs(lo - c3_lower(p)) < 1e-10, p
        assert abs(hi - c3_upper(p)) < 1e-10, p


def test_k2_bounds_at_half():
    lo, hi = bounds_C(0.5, 2)
    assert lo == pytest.approx(0.5625, abs=1e-12)
    assert hi == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_sandwich_nesting_and_gap_bound():
    p = 0.5
    prev = None
    for k in range(2, 11):
        lo, hi = bounds_C(p, k)
        assert hi - lo <= (1 - p) ** k + 1e-12
        if prev is not None:
            plo, phi = prev
            assert lo >= plo - 1e-12
            assert hi <= phi + 1e-12
        prev = (lo, hi)


def test_simulation_agrees_with_exact_speed():
    from lpp.ibm import LetterLaw, simulate_speed

    k, p = 3, 0.5
    mu = lower_bound_mu(p, k)
    masses = {(math.inf if l == INF_LETTER else l): m for l, m in mu.masses.items()}
    sim = simulate_speed(LetterLaw.finite(masses), steps=200000, seed=31, replicas=6)
    exact = exact_speed(mu)
    assert abs(sim.mean - exact) <= 3 * math.sqrt(sim.variance / sim.n)
