"""Exact speeds of finite-support infinite bin models via the projected
Markov chain, and the rational sandwich bounds on the growth constant C(p).

A configuration is summarized by the contents of its bins from the front
down to (but excluding) the bin holding the k-th ball from the right.  That
summary is a word [a_1..a_l] with l <= k-1 letters, letters >= 1, and total
at most k-1; there are exactly 2^(k-1) such words and the summary evolves
autonomously as a Markov chain when every selection number is <= k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .harness import InvalidParameterError, NumericError

__all__ = [
    "INF_LETTER",
    "ProjectedState",
    "FiniteMu",
    "enumerate_states",
    "transition",
    "transition_tables",
    "exact_speed",
    "bounds_C",
    "lower_bound_mu",
    "upper_bound_mu",
    "zero_tail_mu",
]

INF_LETTER = math.inf

_K_MIN, _K_MAX = 2, 20  # resource ceiling on the projection order
_DENSE_K_MAX = 14  # dense stationary solve up to 2^13 states


@dataclass(frozen=True)
class ProjectedState:
    """Bin contents from just above the k-th ball up to the front.

    word[0] is the deepest summarized bin, word[-1] the front bin; the
    empty word means the front bin already holds at least k balls.
    """

    word: tuple[int, ...]
    k: int

    def front_content(self) -> int:
        """Number of balls in the front bin, capped at k."""
        return self.word[-1] if self.word else self.k


@lru_cache(maxsize=None)
def enumerate_states(k: int) -> tuple[ProjectedState, ...]:
    """All 2^(k-1) projected states of order k, deterministically ordered."""
    if not (_K_MIN <= k <= _K_MAX):
        raise InvalidParameterError(f"projection order must be in [{_K_MIN}, {_K_MAX}], got {k}")
    words = [()]
    for total in range(1, k):
        words.extend(_compositions(total))
    words.sort(key=lambda w: (len(w), w))
    states = tuple(ProjectedState(w, k) for w in words)
    assert len(states) == 2 ** (k - 1)
    return states


def _compositions(total: int):
    """All tuples of positive integers summing to `total`."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def transition(state: ProjectedState, xi) -> tuple[ProjectedState, bool]:
    """One projected step; returns (next state, whether the front moved).

    xi may be 0 (unit right shift), a selection number in 1..k, or
    INF_LETTER (no-op).  The front moves iff xi == 0 or xi <= L(state)
    where L is the front-bin content (k for the empty word).
    """
    k = state.k
    if xi == 0:
        return state, True
    if xi == INF_LETTER:
        return state, False
    xi = int(xi)
    if not (1 <= xi <= k):
        raise InvalidParameterError(f"selection number {xi} outside {{0}}∪{{1..{k}}}∪{{inf}}")
    w = state.word
    if xi <= state.front_content():
        new = list(w) + [1]
        moved = True
    else:
        # locate the bin of the xi-th ball from the right within the word
        cum = 0
        pos = None
        for i in range(len(w) - 1, -1, -1):
            cum += w[i]
            if cum >= xi:
                pos = i
                break
        new = list(w)
        if pos is None:
            # the xi-th ball sits just below the summarized bins; the new
            # ball lands in the deepest summarized bin
            new[0] += 1
        else:
            new[pos + 1] += 1
        moved = False
    while sum(new) >= k:
        new.pop(0)
    return ProjectedState(tuple(new), k), moved


@lru_cache(maxsize=None)
def transition_tables(k: int):
    """(targets, moved) arrays indexed by [state, letter] for letters 0..k.

    Row `k+1` of each array is the INF_LETTER column (identity, no move).
    """
    states = enumerate_states(k)
    index = {s.word: i for i, s in enumerate(states)}
    n = len(states)
    targets = np.empty((n, k + 2), dtype=np.int64)
    moved = np.zeros((n, k + 2), dtype=bool)
    for i, s in enumerate(states):
        targets[i, 0], moved[i, 0] = i, True  # xi = 0
        for xi in range(1, k + 1):
            t, m = transition(s, xi)
            targets[i, xi] = index[t.word]
            moved[i, xi] = m
        targets[i, k + 1], moved[i, k + 1] = i, False  # xi = inf
    return states, targets, moved


@dataclass(frozen=True)
class FiniteMu:
    """A selection-number law on {0} ∪ {1..k} ∪ {inf} with mu(k) > 0."""

    k: int
    masses: dict

    def __post_init__(self):
        total = sum(self.masses.values())
        if abs(total - 1.0) > 1e-12:
            raise InvalidParameterError(f"masses sum to {total}, not 1")
        for letter, m in self.masses.items():
            if m < 0:
                raise InvalidParameterError(f"negative mass at {letter}")
            if letter != INF_LETTER and not (0 <= int(letter) <= self.k):
                raise InvalidParameterError(f"letter {letter} outside {{0..{self.k}}}∪{{inf}}")
        if self.masses.get(self.k, 0.0) <= 0.0:
            raise InvalidParameterError(f"irreducibility requires mu({self.k}) > 0")

    def mass(self, letter) -> float:
        return self.masses.get(letter, 0.0)


def lower_bound_mu(p: float, k: int) -> FiniteMu:
    """Geometric(p) with all mass above k pushed to infinity (slower chain)."""
    q = 1.0 - p
    masses = {i: p * q ** (i - 1) for i in range(1, k + 1)}
    masses[INF_LETTER] = q**k
    return FiniteMu(k=k, masses=masses)


def upper_bound_mu(p: float, k: int) -> FiniteMu:
    """Geometric(p) with all mass above k pushed to k (faster chain)."""
    q = 1.0 - p
    masses = {i: p * q ** (i - 1) for i in range(1, k)}
    masses[k] = q ** (k - 1)
    return FiniteMu(k=k, masses=masses)


def zero_tail_mu(p: float, k: int) -> FiniteMu:
    """Geometric(p) with all mass above k pushed to 0 (pure shift)."""
    q = 1.0 - p
    masses = {i: p * q ** (i - 1) for i in range(1, k + 1)}
    masses[0] = q**k
    return FiniteMu(k=k, masses=masses)


def _letter_column(letter, k: int) -> int:
    return k + 1 if letter == INF_LETTER else int(letter)


def stationary_distribution(mu: FiniteMu) -> np.ndarray:
    """Stationary law of the projected chain, residual-checked to 1e-12."""
    k = mu.k
    states, targets, _ = transition_tables(k)
    n = len(states)
    P = np.zeros((n, n))
    rows = np.arange(n)
    for letter, m in mu.masses.items():
        if m == 0.0:
            continue
        col = targets[:, _letter_column(letter, k)]
        np.add.at(P, (rows, col), m)
    if k <= _DENSE_K_MAX:
        A = P.T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
    else:
        pi = np.full(n, 1.0 / n)
        for _ in range(200000):
            nxt = pi @ P
            if np.abs(nxt - pi).max() < 1e-15:
                pi = nxt
                break
            pi = nxt
        else:
            raise NumericError("power iteration did not converge")
    residual = np.abs(pi @ P - pi).max()
    if residual > 1e-12 or pi.min() < -1e-12:
        raise NumericError(f"stationary solve residual {residual:.2e}, min {pi.min():.2e}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def exact_speed(mu: FiniteMu, k: int | None = None) -> float:
    """Front speed of the finite-support bin model: P(front moves) under
    the stationary projected chain."""
    if k is not None and k != mu.k:
        raise InvalidParameterError(f"mu has order {mu.k}, not {k}")
    k = mu.k
    states, _, _ = transition_tables(k)
    pi = stationary_distribution(mu)
    # front moves iff xi = 0 or xi <= front content
    move_prob = np.empty(len(states))
    cum = np.zeros(k + 1)
    acc = mu.mass(0)
    for letter in range(1, k + 1):
        acc += mu.mass(letter)
        cum[letter] = acc
    cum[0] = mu.mass(0)
    for i, s in enumerate(states):
        move_prob[i] = cum[s.front_content()]
    return float(pi @ move_prob)


def bounds_C(p: float, k: int) -> tuple[float, float]:
    """Rational sandwich [lower, upper] around the growth constant C(p),
    with the internal identity and gap bound asserted at runtime."""
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"bounds_C needs 0 < p < 1, got {p}")
    if k < 2:
        raise InvalidParameterError("bounds_C needs k >= 2")
    q = 1.0 - p
    lower = exact_speed(lower_bound_mu(p, k))
    upper = exact_speed(upper_bound_mu(p, k))
    # pushing the tail mass to 0 must add exactly the tail mass to the speed
    shifted = exact_speed(zero_tail_mu(p, k))
    if abs(shifted - (lower + q**k)) > 1e-9:
        raise NumericError(
            f"tail-shift identity violated: {shifted} vs {lower} + {q**k}"
        )
    gap = upper - lower
    if not (-1e-12 <= gap <= q**k + 1e-12):
        raise NumericError(f"gap bound violated: {gap} > (1-p)^{k} = {q**k}")
    return lower, upper
