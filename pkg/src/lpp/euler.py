"""Number-theoretic closed forms: Euler's function, pentagonal series,
skeleton rate, and the integer-partition cross-check.

The product phi(q) = prod_{k>=1} (1 - q^k) is evaluated through the
pentagonal-number series sum_n (-1)^n q^{(3n^2-n)/2}, which converges much
faster than the raw product; 1/phi is the generating function of integer
partitions, which gives the exactness check used in the tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .harness import InvalidParameterError

__all__ = [
    "SeriesValue",
    "DivergentSeriesError",
    "euler_phi",
    "skeleton_rate",
    "skeleton_rate_general",
    "partition_numbers",
    "pentagonal_exponents",
]


class DivergentSeriesError(ValueError):
    """The summability condition behind a truncated product failed."""


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with an upper bound on the absolute tail."""

    value: float
    terms_used: int
    truncation_bound: float


def pentagonal_exponents(n: int) -> tuple[int, int]:
    """Generalized pentagonal numbers n(3n-1)/2 and n(3n+1)/2."""
    return n * (3 * n - 1) // 2, n * (3 * n + 1) // 2


def euler_phi(q: float, tol: float = 1e-15) -> SeriesValue:
    """Evaluate phi(q) = prod (1-q^k) by the pentagonal-number series.

    Truncates once the next exponent's power drops below `tol`; the
    reported truncation bound dominates the absolute tail.
    """
    if not (0.0 <= q < 1.0):
        raise InvalidParameterError(f"euler_phi needs 0 <= q < 1, got {q}")
    if tol <= 0.0:
        raise InvalidParameterError("tol must be positive")
    if q == 0.0:
        return SeriesValue(value=1.0, terms_used=1, truncation_bound=0.0)
    total = 1.0
    terms = 1
    n = 1
    while True:
        e1, e2 = pentagonal_exponents(n)
        t = q**e1 + q**e2
        if q**e1 < tol:
            # all remaining powers are below q^e1; geometric tail bound
            bound = 2.0 * q**e1 / (1.0 - q)
            return SeriesValue(value=total, terms_used=terms, truncation_bound=bound)
        total += t if n % 2 == 0 else -t
        terms += 2
        n += 1


def skeleton_rate(p: float) -> float:
    """Density of skeleton points of the p-connectivity directed graph:
    lambda(p) = phi(1-p)^2."""
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"skeleton_rate needs 0 <= p <= 1, got {p}")
    if p == 0.0:
        warnings.warn("skeleton_rate(0) is degenerate: the graph has no edges", stacklevel=2)
        return 0.0
    if p == 1.0:
        return 1.0
    return euler_phi(1.0 - p).value ** 2


def skeleton_rate_general(p_seq, tol: float = 1e-12, max_terms: int = 10**7) -> float:
    """Skeleton rate for distance-dependent connectivity probabilities:
    lambda = prod_{j>0} (1 - Q_j)^2 with Q_j = (1-p_1)...(1-p_j).

    `p_seq` is a callable j -> p_j (1-based) or a sequence whose last
    entry repeats forever. Verifies sum Q_j < infinity numerically up to
    `tol` and raises DivergentSeriesError otherwise.
    """
    if callable(p_seq):
        prob = p_seq
    else:
        seq = list(p_seq)
        if not seq:
            raise InvalidParameterError("p_seq must be nonempty")
        prob = lambda j: seq[j - 1] if j <= len(seq) else seq[-1]

    p1 = prob(1)
    if not (0.0 < p1 <= 1.0):
        raise InvalidParameterError(f"need p_1 in (0,1], got {p1}")

    log_lambda = 0.0
    big_q = 1.0
    partial_sum = 0.0
    for j in range(1, max_terms + 1):
        pj = prob(j)
        if not (0.0 <= pj <= 1.0):
            raise InvalidParameterError(f"p_{j} = {pj} is not a probability")
        if pj == 1.0:
            # product over j >= k with p_k = 1 is empty
            return math.exp(log_lambda)
        big_q *= 1.0 - pj
        partial_sum += big_q
        log_lambda += 2.0 * math.log1p(-big_q)
        # ratio Q_{j+1}/Q_j = 1 - p_{j+1} <= 1 - p_1 < 1 only if p's are
        # bounded below; use the observed ratio for the geometric tail test
        ratio = 1.0 - prob(j + 1)
        if big_q == 0.0:
            return math.exp(log_lambda)
        if ratio < 1.0 and big_q * ratio / (1.0 - ratio) < tol * 0.25:
            # tail of sum Q is < tol/4, so the tail of -2 log(1-Q) is < tol
            return math.exp(log_lambda)
    raise DivergentSeriesError(
        f"sum of Q_j did not converge within {max_terms} terms (partial sum {partial_sum:.3g})"
    )


def partition_numbers(n_max: int) -> list[int]:
    """Exact integer partition counts p(1)..p(n_max) via the pentagonal
    recurrence (coefficients of 1/phi)."""
    if n_max < 0:
        raise InvalidParameterError("n_max must be nonnegative")
    if n_max == 0:
        return []
    p = [0] * (n_max + 1)
    p[0] = 1
    for n in range(1, n_max + 1):
        total = 0
        k = 1
        while True:
            e1, e2 = pentagonal_exponents(k)
            if e1 > n:
                break
            sign = 1 if k % 2 == 1 else -1
            total += sign * p[n - e1]
            if e2 <= n:
                total += sign * p[n - e2]
            k += 1
        p[n] = total
    return p[1:]
