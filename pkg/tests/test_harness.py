import math

import numpy as np
import pytest

from lpp.harness import (
    InvalidParameterError,
    MonteCarloSummary,
    RngStream,
    geometric_block,
    run_replicas,
    sample_geometric,
)


def test_geometric_p_one_is_always_one():
    gen = RngStream(1).generator()
    assert all(sample_geometric(1.0, gen) == 1 for _ in range(100))


def test_geometric_rejects_bad_parameters():
    gen = RngStream(1).generator()
    for p in (0.0, -0.1, 1.5):
        with pytest.raises(InvalidParameterError):
            sample_geometric(p, gen)


def test_geometric_mean_and_tail():
    n = 10**6
    draws = geometric_block(0.5, n, RngStream(7).generator())
    # E = 1/p = 2, var = (1-p)/p^2 = 2
    se = math.sqrt(2.0 / n)
    assert abs(draws.mean() - 2.0) < 3 * se
    # P(xi > 3) = (1-p)^3 = 0.125
    tail = (draws > 3).mean()
    se_tail = math.sqrt(0.125 * 0.875 / n)
    assert abs(tail - 0.125) < 3 * se_tail


def test_run_replicas_constant_task():
    s = run_replicas(lambda gen: 7.0, n=100, seed=3)
    assert s.mean == 7.0
    assert s.variance == 0.0
    assert s.ci95_halfwidth == 0.0


def test_run_replicas_is_bit_reproducible():
    task = lambda gen: float(gen.random())
    a = run_replicas(task, n=50, seed=11)
    b = run_replicas(task, n=50, seed=11)
    assert a == b


def test_run_replicas_geometric_mean():
    s = run_replicas(lambda gen: sample_geometric(0.5, gen), n=10**5, seed=5)
    assert abs(s.mean - 2.0) <= s.ci95_halfwidth


def test_run_replicas_needs_two():
    with pytest.raises(InvalidParameterError):
        run_replicas(lambda gen: 0.0, n=1, seed=0)


def test_stream_independence():
    # 0.02 is a ~2 sigma bound at this sample size, so the streams are
    # pinned; any fixed choice passes or fails deterministically
    n = 10**4
    base = np.stack([RngStream(9, i).generator().random(n) for i in range(6)])
    for i in range(6):
        for j in range(i + 1, 6):
            corr = np.corrcoef(base[i], base[j])[0, 1]
            assert abs(corr) < 0.02


def test_identical_streams_are_identical():
    a = RngStream(42, 9).generator().random(1000)
    b = RngStream(42, 9).generator().random(1000)
    assert np.array_equal(a, b)


def test_summary_invariants():
    s = MonteCarloSummary.from_values([1.0, 2.0, 3.0, 4.0])
    assert s.variance >= 0.0
    assert s.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(s.variance / s.n))
