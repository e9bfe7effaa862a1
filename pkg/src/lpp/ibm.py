"""The infinite bin model as a Markov process.

A configuration holds balls in bins; at each step a selection number xi is
drawn and a new ball is added immediately to the right of the bin holding
the xi-th ball counted from the right.  The front (rightmost nonempty bin)
then advances at a deterministic asymptotic speed, which for geometric
selection numbers equals the growth constant of the matching directed
random graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .harness import (
    InvalidParameterError,
    MonteCarloSummary,
    RngStream,
    as_generator,
    geometric_block,
)

__all__ = [
    "Configuration",
    "LetterLaw",
    "select_bin",
    "apply_selection",
    "simulate_speed",
    "estimate_C_via_front",
    "detect_renewals",
    "coupling_check",
    "dominates",
]

INF = math.inf
_INF_CODE = -1  # letters encoded as int64; -1 stands for infinity
_SHIFT_CODE = 0


@dataclass
class Configuration:
    """Ball counts for the bins front, front-1, ..., front-depth+1.

    `below_saturated` marks every deeper bin as effectively infinite
    (the canonical state space has nonempty bins all the way down); the
    dynamics never need to know more, because a ball whose selection
    number overshoots the stored mass always lands in the deepest stored
    bin.  With the flag off the configuration is taken to end at the
    stored depth (a test-only variant, not a member of the canonical
    state space).
    """

    front: int
    counts: list[int] = field(default_factory=lambda: [1])
    below_saturated: bool = True

    def __post_init__(self):
        if not self.counts:
            raise InvalidParameterError("counts must be nonempty")
        if any(c < 1 for c in self.counts):
            raise InvalidParameterError("stored bins must be nonempty")

    def copy(self) -> "Configuration":
        return Configuration(self.front, list(self.counts), self.below_saturated)

    def front_content(self) -> int:
        return self.counts[0]

    def depth(self) -> int:
        return len(self.counts)

    def top_profile(self, k: int) -> tuple[int, ...] | None:
        """Contents of the top k bins, or None if not stored that deep."""
        if k > len(self.counts):
            return None
        return tuple(self.counts[:k])


def select_bin(x: Configuration, xi) -> float:
    """Index of the bin holding the xi-th ball from the right (-inf for
    xi = infinity)."""
    if xi == INF:
        return -INF
    xi = int(xi)
    if xi < 1:
        raise InvalidParameterError("selection numbers are >= 1 (or infinity)")
    cum = 0
    for i, c in enumerate(x.counts):
        cum += c
        if cum >= xi:
            return x.front - i
    if x.below_saturated:
        return x.front - len(x.counts)
    return -INF


def apply_selection(x: Configuration, xi) -> Configuration:
    """One step: xi = 0 shifts the front right by one, xi = infinity is the
    identity, and a finite xi >= 1 adds a ball at select_bin(x, xi) + 1.
    The front advances iff xi = 0 or xi <= front content."""
    y = x.copy()
    _apply_inplace(y, xi)
    return y


def _apply_inplace(x: Configuration, xi) -> bool:
    """Mutating step; returns whether the front moved."""
    if xi == INF:
        return False
    xi = int(xi)
    if xi == 0:
        x.front += 1
        return True
    if xi <= x.counts[0]:
        x.counts.insert(0, 1)
        x.front += 1
        return True
    cum = 0
    for i, c in enumerate(x.counts):
        cum += c
        if cum >= xi:
            x.counts[i - 1] += 1
            return False
    if x.below_saturated:
        x.counts[-1] += 1
    # unsaturated overshoot: no ball lands (test-only configurations)
    return False


class LetterLaw:
    """A selection-number law on {0, 1, 2, ...} ∪ {infinity}."""

    def __init__(self, kind: str, *, p: float | None = None, masses: dict | None = None):
        self.kind = kind
        if kind == "geometric":
            if p is None or not (0.0 < p <= 1.0):
                raise InvalidParameterError(f"geometric law needs p in (0,1], got {p}")
            self.p = p
            self.mean_finite = 1.0 / p
        elif kind == "finite":
            if not masses:
                raise InvalidParameterError("finite law needs masses")
            total = sum(masses.values())
            if abs(total - 1.0) > 1e-12 or any(m < 0 for m in masses.values()):
                raise InvalidParameterError("masses must be a probability vector")
            self.masses = dict(masses)
            self._letters = np.array(
                [_INF_CODE if k == INF else int(k) for k in self.masses], dtype=np.int64
            )
            self._probs = np.array(list(self.masses.values()))
        else:
            raise InvalidParameterError(f"unknown letter law {kind!r}")

    @classmethod
    def geometric(cls, p: float) -> "LetterLaw":
        return cls("geometric", p=p)

    @classmethod
    def finite(cls, masses: dict) -> "LetterLaw":
        return cls("finite", masses=masses)

    def mass(self, letter) -> float:
        if self.kind == "geometric":
            if letter in (0, INF):
                return 0.0
            return self.p * (1.0 - self.p) ** (int(letter) - 1)
        return self.masses.get(letter, 0.0)

    def mass_one(self) -> float:
        return self.mass(1)

    def sample_block(self, gen: np.random.Generator, size: int) -> np.ndarray:
        """Letters encoded as int64: -1 = infinity, 0 = shift, k >= 1 normal."""
        if self.kind == "geometric":
            return geometric_block(self.p, size, gen)
        idx = gen.choice(len(self._letters), size=size, p=self._probs)
        return self._letters[idx]


def _run_front(law: LetterLaw, steps: int, x: Configuration, gen, chunk: int = 65536):
    """Advance `steps` letters in place; returns the front trajectory.

    The ball counts are kept deepest-first internally so that a front
    advance is an O(1) append.
    """
    fronts = np.empty(steps + 1, dtype=np.int64)
    fronts[0] = x.front
    rev = x.counts[::-1]  # rev[-1] = front bin
    front = x.front
    done = 0
    while done < steps:
        m = min(chunk, steps - done)
        letters = law.sample_block(gen, m)
        for t in range(m):
            xi = letters[t]
            if xi == _INF_CODE:
                pass
            elif xi == _SHIFT_CODE:
                front += 1
            elif xi <= rev[-1]:
                rev.append(1)
                front += 1
            else:
                cum = 0
                i = len(rev) - 1
                while i >= 0:
                    cum += rev[i]
                    if cum >= xi:
                        rev[i + 1] += 1
                        break
                    i -= 1
                else:
                    rev[0] += 1  # overshoot: deepest stored bin
            fronts[done + t + 1] = front
        done += m
    x.front = front
    x.counts = rev[::-1]
    return fronts


def simulate_speed(
    mu: LetterLaw,
    steps: int,
    x0: Configuration | None = None,
    seed: int = 0,
    replicas: int = 4,
    burnin: int | None = None,
) -> MonteCarloSummary:
    """Monte Carlo estimate of the front speed (front displacement per
    step after burn-in, averaged over independent replicas)."""
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    if burnin is None:
        burnin = steps // 10
    if not (0 <= burnin < steps):
        raise InvalidParameterError("burnin must be in [0, steps)")

    def one(gen):
        x = x0.copy() if x0 is not None else Configuration(front=0)
        fronts = _run_front(mu, steps, x, gen)
        return (fronts[steps] - fronts[burnin]) / (steps - burnin)

    values = [one(RngStream(seed, i).generator()) for i in range(replicas)]
    return MonteCarloSummary.from_values(values)


def estimate_C_via_front(
    p: float, steps: int, burnin: int | None = None, seed: int = 0, replicas: int = 4
) -> MonteCarloSummary:
    """Estimate the growth constant as 1 - time average of (1-p)^(front
    content) in the front-pinned chain after burn-in."""
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(f"need 0 < p < 1, got {p}")
    if burnin is None:
        burnin = steps // 10
    law = LetterLaw.geometric(p)
    q = 1.0 - p

    def one(gen):
        rev = [1]  # deepest-first; rev[-1] = front bin
        letters = law.sample_block(gen, steps)
        acc = 0.0
        for t in range(steps):
            xi = letters[t]
            if xi <= rev[-1]:
                rev.append(1)
            else:
                cum = 0
                i = len(rev) - 1
                while i >= 0:
                    cum += rev[i]
                    if cum >= xi:
                        rev[i + 1] += 1
                        break
                    i -= 1
                else:
                    rev[0] += 1
            if t >= burnin:
                acc += q ** rev[-1]
        return 1.0 - acc / (steps - burnin)

    values = [one(RngStream(seed, i).generator()) for i in range(replicas)]
    return MonteCarloSummary.from_values(values)


def detect_renewals(xi_stream, horizon: int) -> list[int]:
    """Indices k whose forward letters satisfy xi_{k+i} <= i+1 for all
    i up to the horizon (a certified prefix of the renewal condition)."""
    xs = list(xi_stream)
    n = len(xs)
    out = []
    for k in range(n):
        ok = True
        for i in range(min(horizon, n - 1 - k) + 1):
            if xs[k + i] > i + 1:
                ok = False
                break
        if ok:
            out.append(k)
    return out


def dominates(x: Configuration, y: Configuration) -> bool:
    """Partial-order test: every tail count of x is <= that of y, compared
    over the bins both configurations store."""
    top = max(x.front, y.front)
    bot = max(x.front - len(x.counts), y.front - len(y.counts)) + 1

    def tail(conf, level):
        # total balls in bins >= level
        hi = conf.front - level + 1  # number of stored bins at or above level
        if hi <= 0:
            return 0
        return sum(conf.counts[: min(hi, len(conf.counts))])

    return all(tail(x, lvl) <= tail(y, lvl) for lvl in range(bot, top + 1))


def coupling_check(
    mu: LetterLaw, x0: Configuration, y0: Configuration, steps: int, seed: int = 0, k_max: int = 5
) -> dict[int, int | None]:
    """Run two chains on a shared letter stream; for each k record the
    first step after which the top-k profiles agree, verifying they never
    diverge afterwards."""
    if mu.mass_one() <= 0.0:
        raise InvalidParameterError("renewal-based coupling needs mu(1) > 0")
    gen = as_generator(RngStream(seed))
    x, y = x0.copy(), y0.copy()
    first_agree: dict[int, int | None] = {k: None for k in range(1, k_max + 1)}

    def scan(t):
        for k in range(1, k_max + 1):
            px, py = x.top_profile(k), y.top_profile(k)
            if px is None and py is None:
                # not stored that deep on either side: equal only if the
                # whole stored (front-relative) configurations coincide
                agree = x.counts == y.counts and x.below_saturated == y.below_saturated
            else:
                agree = px is not None and px == py
            if agree and first_agree[k] is None:
                first_agree[k] = t
            if not agree and first_agree[k] is not None:
                raise AssertionError(f"top-{k} profiles diverged again at step {t}")

    scan(0)
    letters = mu.sample_block(gen, steps)
    for t in range(steps):
        _apply_inplace(x, INF if letters[t] == _INF_CODE else int(letters[t]))
        _apply_inplace(y, INF if letters[t] == _INF_CODE else int(letters[t]))
        scan(t + 1)
    return first_agree
