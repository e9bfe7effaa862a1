"""The two-weights model: edges carry charge 1 with probability p and a
fixed charge x otherwise.  Estimation of the growth constant C(p, x),
closed-form checks, balanced 0/1 sequences, and the witness graphs whose
tied maximal paths certify the criticality (non-differentiability points)
of x -> C(p, x).

A graph witnesses criticality of x when it admits two maximal-charge
paths from end to end with different numbers of non-edges ("red" edges),
while every interior vertex lies on some end-to-end path of the graph and
fails to be two-sided connected to at least one other vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import EdgeLaw, max_charge_profile, sample_window
from .harness import (
    InvalidParameterError,
    MonteCarloSummary,
    RngStream,
)

__all__ = [
    "WitnessGraph",
    "BalancedSeq",
    "estimate_Cpx",
    "c_at_zero",
    "scaling_check",
    "balanced_sequence",
    "build_witness",
    "verify_critical",
    "membership_check",
    "maximal_paths",
    "path_value",
]

NEG_INF = -math.inf
_ENUM_LIMIT = 20  # full path enumeration up to 2^(n-1) paths


# ---------------------------------------------------------------------------
# estimation

def estimate_Cpx(
    p: float, x, n: int, reps: int, seed: int = 0
) -> MonteCarloSummary:
    """Monte Carlo of the positive part of the end-to-end maximal charge
    per vertex; x = -inf recovers the presence-only growth constant."""
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("need 0 < p < 1")
    law = EdgeLaw.bernoulli(p) if x == NEG_INF else EdgeLaw.two_atom(p, float(x))

    values = []
    for r in range(reps):
        w = sample_window(n, law, RngStream(seed, r))
        wn = max_charge_profile(w)[n]
        values.append(max(wn, 0.0) / n)
    return MonteCarloSummary.from_values(values)


def c_at_zero(q: float, tol: float = 1e-15) -> float:
    """Closed form of the growth constant at charge 0:
    C(q, 0) = (sum_{n>=1} (1-q)^{n(n-1)/2})^{-1}."""
    if not (0.0 < q < 1.0):
        raise InvalidParameterError("need 0 < q < 1")
    r = 1.0 - q
    total = 0.0
    n = 1
    while True:
        term = r ** (n * (n - 1) / 2)
        total += term
        if term < tol:
            break
        n += 1
    return 1.0 / total


@dataclass(frozen=True)
class ScalingReport:
    direct: MonteCarloSummary          # Chat(p, x)
    via_inverse: MonteCarloSummary     # x * Chat(1-p, 1/x)
    via_same: MonteCarloSummary        # x * Chat(1-p, x)


def scaling_check(p: float, x: float, n: int, reps: int, seed: int = 0) -> ScalingReport:
    """Emit the three estimates of the scaling relation; nothing is
    asserted (the identity's exact form is left to the reader of the
    report)."""
    if x <= 0:
        raise InvalidParameterError("scaling check needs x > 0")

    def scaled(summary: MonteCarloSummary, factor: float) -> MonteCarloSummary:
        return MonteCarloSummary(
            n=summary.n,
            mean=factor * summary.mean,
            variance=factor**2 * summary.variance,
            ci95_halfwidth=factor * summary.ci95_halfwidth,
        )

    direct = estimate_Cpx(p, x, n, reps, seed)
    inv = scaled(estimate_Cpx(1.0 - p, 1.0 / x, n, reps, seed + 1), x)
    same = scaled(estimate_Cpx(1.0 - p, x, n, reps, seed + 2), x)
    return ScalingReport(direct=direct, via_inverse=inv, via_same=same)


# ---------------------------------------------------------------------------
# balanced sequences

@dataclass(frozen=True)
class BalancedSeq:
    bits: tuple[int, ...]
    N: int
    n: int


def _balanced_ok(bits, N, n) -> bool:
    pref = [0]
    for b in bits:
        pref.append(pref[-1] + b)
    for i in range(N + 1):
        for j in range(i + 1, N + 1):
            s = pref[j] - pref[i]
            lo = (j - i) * n // N
            hi = -((-(j - i) * n) // N)  # ceil
            if not (lo <= s <= hi):
                return False
    for i in range(N):
        if pref[N] - pref[i] != (N - i) * n // N:
            return False
    return bits[0] == 1


def balanced_sequence(N: int, n: int) -> BalancedSeq:
    """The unique 0/1 sequence distributing n ones over N slots with every
    window sum within rounding of proportionality; constructed by rounding
    an offset linear ramp and verified exhaustively."""
    if not (1 <= n <= N):
        raise InvalidParameterError("need 1 <= n <= N")
    for twice_offset in range(2 * N):
        theta = twice_offset / (2.0 * N)
        bits = tuple(
            int(math.floor(k * n / N + theta) - math.floor((k - 1) * n / N + theta))
            for k in range(1, N + 1)
        )
        if all(b in (0, 1) for b in bits) and _balanced_ok(bits, N, n):
            return BalancedSeq(bits=bits, N=N, n=n)
    raise AssertionError(f"no balanced sequence found for (N, n) = ({N}, {n})")


# ---------------------------------------------------------------------------
# witness graphs

@dataclass(frozen=True)
class WitnessGraph:
    n: int
    blue_edges: frozenset


def _chain(a: int, b: int):
    return {(i, i + 1) for i in range(a, b)}


def build_witness(x) -> WitnessGraph:
    """Witness graph for a critical charge x.

    Supported x: 0; reciprocals 1/k (k >= 2); negative integers -l; and
    negative non-integer rationals -l + s/t.  (Criticality of the
    integers k >= 2 follows from that of 1/k by charge scaling, so they
    carry no graph of their own.)
    """
    x = _as_rational(x)
    if x == 0:
        return WitnessGraph(
            n=3, blue_edges=frozenset({(0, 1), (0, 2), (1, 3), (2, 3)})
        )
    if x > 0:
        if x.numerator == 1 and x.denominator >= 2:
            k = x.denominator
            edges = {(0, 1), (1, k + 1), (k + 1, k + 2)}
            for j in range(2, k + 1):
                edges.add((0, j))
                edges.add((j, k + 2))
            return WitnessGraph(n=k + 2, blue_edges=frozenset(edges))
        raise InvalidParameterError(f"no witness family for x = {x}")
    if x.denominator == 1:
        l = -int(x)
        n = 2 * l + 3
        edges = _chain(0, l + 1) | _chain(l + 2, n) | {(0, l + 2), (l + 1, n)}
        return WitnessGraph(n=n, blue_edges=frozenset(edges))
    return _fractional_witness(x)


def _as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) and float(x).is_integer():
        return Fraction(int(x))
    raise InvalidParameterError(
        f"witness charges must be exact rationals (int or Fraction), got {x!r}"
    )


def _fractional_witness(x: Fraction) -> WitnessGraph:
    """Witness for x = -l + s/t with l, s, t positive, gcd(s, t) = 1, s < t.

    Layout on 0..3m: a consecutive run to m, arc vertices a_0=m < a_1 <
    ... < a_t = 2m joined by long blue arcs, and a consecutive run from 2m
    to 3m.  Segment interiors carry blue chains that start one vertex
    after each bridge landing, so that the interior route pays exactly one
    red edge per segment; its t red edges against the all-blue main path
    produce the tie at x.
    """
    l = -math.floor(x)      # x = -l + s/t with 0 < s/t < 1
    frac = x + l
    s, t = frac.numerator, frac.denominator
    if not (l >= 1 and 0 < s < t):
        raise InvalidParameterError(f"no witness family for x = {x}")
    m = t * (l + 3) - (s + 1)
    n = 3 * m
    v = balanced_sequence(t, t - s).bits
    a = [m]
    a.append(a[0] + (l + 1) + v[0])
    for j in range(2, t + 1):
        a.append(a[-1] + (l + 2) + v[j - 1])
    assert a[-1] == 2 * m, (a, m)

    edges = _chain(0, m) | _chain(2 * m, n)
    for j in range(t):
        edges.add((a[j], a[j + 1]))                   # long blue arcs
    # segment 1 interior: chain over the whole interior
    edges |= _chain(a[0] + 1, a[1] - 1)
    # later segments: the chain starts one vertex after the bridge landing
    for j in range(1, t):
        edges |= _chain(a[j] + 2, a[j + 1] - 1)
    # bridges skip each arc vertex; the last one lands on a_t itself
    for j in range(1, t):
        edges.add((a[j] - 1, a[j] + 1))
    edges.add((a[t] - 1, a[t]))
    # entry and exit edges keep every interior vertex on a blue path
    edges.add((0, a[0] + 1))
    for j in range(1, t):
        edges.add((0, a[j] + 2))
        edges.add((a[j] + 1, n))
    return WitnessGraph(n=n, blue_edges=frozenset(edges))


# ---------------------------------------------------------------------------
# criticality verification

def path_value(g: WitnessGraph, path, x) -> tuple[Fraction, int]:
    """(total charge, red count) of an increasing vertex sequence."""
    x = Fraction(x)
    blues = reds = 0
    for a, b in zip(path, path[1:]):
        if (a, b) in g.blue_edges:
            blues += 1
        else:
            reds += 1
    return blues + x * reds, reds


def maximal_paths(g: WitnessGraph, x) -> tuple[Fraction, list[tuple[tuple, int]]]:
    """All end-to-end maximal-charge paths by exhaustive enumeration
    (small n only); returns (value, [(path, red count), ...])."""
    if g.n > _ENUM_LIMIT:
        raise InvalidParameterError(f"enumeration is limited to n <= {_ENUM_LIMIT}")
    x = Fraction(x)
    best = None
    winners: list[tuple[tuple, int]] = []

    def extend(path, blues, reds):
        nonlocal best, winners
        v = path[-1]
        if v == g.n:
            val = blues + x * reds
            if best is None or val > best:
                best = val
                winners = [(tuple(path), reds)]
            elif val == best:
                winners.append((tuple(path), reds))
            return
        for u in range(v + 1, g.n + 1):
            blue = (v, u) in g.blue_edges
            extend(path + [u], blues + blue, reds + (not blue))

    extend([0], 0, 0)
    return best, winners


def _blue_reachability(g: WitnessGraph) -> np.ndarray:
    n = g.n
    reach = np.zeros((n + 1, n + 1), dtype=bool)
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n + 1):
            if (i, j) in g.blue_edges:
                reach[i, j] = True
                reach[i] |= reach[j]
    return reach


def membership_check(g: WitnessGraph) -> bool:
    """Both witness-class conditions: every interior vertex lies on a blue
    end-to-end path, and is not two-sided connected to everything."""
    n = g.n
    reach = _blue_reachability(g)
    for j in range(1, n):
        on_path = (j == 0) or reach[0, j]
        on_path = on_path and reach[j, n]
        if not on_path:
            return False
        fails_somewhere = any(
            not reach[min(i, j), max(i, j)] for i in range(n + 1) if i != j
        )
        if not fails_somewhere:
            return False
    return True


def _red_count_table(g: WitnessGraph):
    """best[v][r] = maximal blue count over 0->v paths with r red edges."""
    n = g.n
    NEG = -1
    best = [[NEG] * (n + 1) for _ in range(n + 1)]
    best[0][0] = 0
    choice = [[None] * (n + 1) for _ in range(n + 1)]
    for v in range(1, n + 1):
        row = best[v]
        ch = choice[v]
        for u in range(v):
            blue = (u, v) in g.blue_edges
            bu = best[u]
            for r in range(n):
                if bu[r] == NEG:
                    continue
                if blue:
                    cand, rr = bu[r] + 1, r
                else:
                    cand, rr = bu[r], r + 1
                if cand > row[rr]:
                    row[rr] = cand
                    ch[rr] = (u, r)
    return best, choice


def verify_critical(g: WitnessGraph, x) -> tuple[bool, list[tuple]]:
    """Whether two end-to-end maximal paths with distinct red counts exist
    at charge x, together with two certificate paths.

    Small graphs are checked by full path enumeration; larger ones by the
    red-count dynamic program (max blue count per (vertex, red count),
    exact rational arithmetic at the comparison)."""
    x = Fraction(x)
    if not membership_check(g):
        return False, []
    if g.n <= _ENUM_LIMIT:
        _, winners = maximal_paths(g, x)
        reds = {r for _, r in winners}
        if len(reds) < 2:
            return False, []
        pick = {}
        for path, r in winners:
            pick.setdefault(r, path)
        two = sorted(pick)[:2]
        return True, [pick[r] for r in two]
    best, choice = _red_count_table(g)
    values = {
        r: best[g.n][r] + x * r for r in range(g.n + 1) if best[g.n][r] >= 0
    }
    top = max(values.values())
    arg = sorted(r for r, v in values.items() if v == top)
    if len(arg) < 2:
        return False, []

    def backtrack(r):
        path = [g.n]
        v = g.n
        while v != 0:
            u, r = choice[v][r]
            path.append(u)
            v = u
        return tuple(reversed(path))

    return True, [backtrack(arg[0]), backtrack(arg[1])]
