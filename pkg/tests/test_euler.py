import math
from itertools import combinations_with_replacement

import pytest

from lpp.euler import (
    DivergentSeriesError,
    euler_phi,
    partition_numbers,
    skeleton_rate,
    skeleton_rate_general,
)
from lpp.harness import InvalidParameterError


def phi_product(q: float, terms: int = 4000) -> float:
    """Independent oracle: the raw product, run to machine convergence."""
    out = 1.0
    for k in range(1, terms + 1):
        f = 1.0 - q**k
        out *= f
        if q**k < 1e-18:
            break
    return out


def test_phi_at_zero():
    assert euler_phi(0.0).value == 1.0


def test_phi_against_product_oracle():
    v = euler_phi(0.5)
    assert v.value == pytest.approx(0.2887880951, abs=1e-9)
    assert abs(v.value - phi_product(0.5)) < 1e-12


def test_phi_series_equals_product_on_grid():
    for q10 in range(1, 10):
        q = q10 / 10
        assert abs(euler_phi(q).value - phi_product(q)) < 1e-12


def test_phi_rejects_bad_arguments():
    with pytest.raises(InvalidParameterError):
        euler_phi(1.0)
    with pytest.raises(InvalidParameterError):
        euler_phi(0.5, tol=0.0)


def test_phi_truncation_bound_dominates_tail():
    coarse = euler_phi(0.6, tol=1e-6)
    fine = euler_phi(0.6, tol=1e-15)
    assert abs(coarse.value - fine.value) <= coarse.truncation_bound


def test_skeleton_rate_endpoints_and_table():
    assert skeleton_rate(1.0) == 1.0
    with pytest.warns(UserWarning):
        assert skeleton_rate(0.0) == 0.0
    assert 1.0 / skeleton_rate(0.5) == pytest.approx(11.99, abs=0.005)
    assert 1.0 / skeleton_rate(0.3) == pytest.approx(558.46, abs=0.005)


def test_skeleton_rate_monotone():
    grid = [i / 20 for i in range(1, 21)]
    vals = [skeleton_rate(p) for p in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_general_rate_reduces_to_constant():
    for p in (0.3, 0.5, 0.9):
        assert abs(skeleton_rate_general(lambda j, p=p: p) - skeleton_rate(p)) < 1e-12


def test_general_rate_with_certain_first_edge():
    # p_1 = 1 makes every product term vanish: the rate is 1
    assert skeleton_rate_general([1.0]) == 1.0


def test_general_rate_fast_sequence_vs_long_product():
    prob = lambda j: 1.0 - 2.0**-j
    # direct long-product oracle
    log_lam = 0.0
    big_q = 1.0
    for j in range(1, 10**6 + 1):
        big_q *= 1.0 - prob(j)
        if big_q == 0.0:
            break
        log_lam += 2.0 * math.log1p(-big_q)
    assert abs(skeleton_rate_general(prob) - math.exp(log_lam)) < 1e-9


def test_general_rate_divergence_detected():
    # Q_j = 1/(j+1): the summability condition fails
    with pytest.raises(DivergentSeriesError):
        skeleton_rate_general(lambda j: 1.0 / (j + 1), max_terms=20000)


def brute_partitions(n: int) -> int:
    """Count multisets of positive integers summing to n (parts <= mx)."""

    def count(m, mx):
        if m == 0:
            return 1
        if mx == 0:
            return 0
        return count(m, mx - 1) + (count(m - mx, mx) if mx <= m else 0)

    return count(n, n)


def test_partition_numbers_against_enumeration():
    got = partition_numbers(10)
    expect = [brute_partitions(n) for n in range(1, 11)]
    assert got == expect
    assert got[:5] == [1, 2, 3, 5, 7]
    assert got[9] == 42


def test_partition_numbers_empty():
    assert partition_numbers(0) == []


def test_generating_function_identity():
    """Convolving the partition sequence with the signed pentagonal
    coefficients returns the delta sequence."""
    n_max = 50
    p = [1] + partition_numbers(n_max)
    phi_coeffs = [0] * (n_max + 1)
    phi_coeffs[0] = 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 > n_max:
            break
        sign = -1 if k % 2 == 1 else 1
        phi_coeffs[e1] += sign
        if e2 <= n_max:
            phi_coeffs[e2] += sign
        k += 1
    for n in range(n_max + 1):
        conv = sum(p[m] * phi_coeffs[n - m] for m in range(n + 1))
        assert conv == (1 if n == 0 else 0), n
