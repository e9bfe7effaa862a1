"""The Max Growth System and perfect simulation of the growth constant.

State: a point measure with finitely many particles on the positive axis;
one step adds a particle at the supremum of (k-th largest location + k-th
column entry).  Feeding the columns of a charged graph reproduces the
end-to-end maximal charges in law, and a backward search for a decoupling
time T* < 0 makes the time-0 increment an exact draw from stationarity:
the positive part has expectation exactly the growth constant C(F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harness import (
    InvalidParameterError,
    MonteCarloSummary,
    ResourceError,
    RngStream,
    as_generator,
)

__all__ = [
    "PointMeasure",
    "ChargeLaw1",
    "shifted_exponential",
    "bernoulli_law",
    "two_atom_law",
    "m_value",
    "mgs_step",
    "perfect_sample",
    "perfect_sample_debug",
    "brute_force_t_star",
    "estimate_CF",
    "EstimateReport",
    "complexity_profile",
    "glynn_rhee_sample",
    "glynn_rhee_estimate",
]

NEG_INF = -math.inf


@dataclass
class PointMeasure:
    """Particle locations in descending order plus a count of particles
    parked at -infinity."""

    locations: list[float]
    neg_inf_count: int = 0

    def __post_init__(self):
        if any(b > a for a, b in zip(self.locations, self.locations[1:])):
            raise InvalidParameterError("locations must be descending")
        if any(l == NEG_INF for l in self.locations):
            raise InvalidParameterError("-infinity atoms go in neg_inf_count")

    @classmethod
    def delta(cls, location: float = 0.0) -> "PointMeasure":
        return cls(locations=[location])

    def size(self) -> float:
        return len(self.locations) + self.neg_inf_count

    def location(self, k: int) -> float:
        """Location of the k-th largest particle (1-based)."""
        if k <= len(self.locations):
            return self.locations[k - 1]
        if k <= self.size():
            return NEG_INF
        raise InvalidParameterError(f"measure has {self.size()} particles, not {k}")

    def add(self, location: float) -> None:
        if location == NEG_INF:
            self.neg_inf_count += 1
            return
        self._insert(location)

    def _insert(self, location: float) -> None:
        lo, hi = 0, len(self.locations)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.locations[mid] > location:
                lo = mid + 1
            else:
                hi = mid
        self.locations.insert(lo, location)

    def recentered(self) -> "PointMeasure":
        """Shift so the largest particle sits at 0."""
        if not self.locations:
            raise InvalidParameterError("cannot recenter an empty/-inf measure")
        top = self.locations[0]
        return PointMeasure(
            locations=[l - top for l in self.locations],
            neg_inf_count=self.neg_inf_count,
        )


class ChargeLaw1:
    """A charge law on (-inf, 1] with essential supremum exactly 1."""

    def __init__(self, name: str, sampler, mass_geq, atom_at_one: bool):
        self.name = name
        self._sampler = sampler        # (gen, size) -> array
        self._mass_geq = mass_geq      # x -> P(w >= x)
        self.atom_at_one = atom_at_one

    def sample_block(self, gen: np.random.Generator, size: int) -> np.ndarray:
        return self._sampler(gen, size)

    def mass_geq(self, x: float) -> float:
        return self._mass_geq(x)

    def default_ell(self) -> float:
        return 0.0 if self.atom_at_one else 0.7


def shifted_exponential() -> ChargeLaw1:
    """Density e^(x-1) on (-inf, 1]."""
    return ChargeLaw1(
        name="shifted-exp",
        sampler=lambda gen, size: 1.0 + np.log(1.0 - gen.random(size)),
        mass_geq=lambda x: 1.0 if x == NEG_INF else min(1.0, math.exp(min(x, 1.0) - 1.0)),
        atom_at_one=False,
    )


def bernoulli_law(p: float) -> ChargeLaw1:
    """Charge 1 with probability p, -infinity otherwise."""
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("need 0 < p < 1")
    return ChargeLaw1(
        name=f"bernoulli:{p}",
        sampler=lambda gen, size: np.where(gen.random(size) < p, 1.0, NEG_INF),
        mass_geq=lambda x: 1.0 if x == NEG_INF else (p if x <= 1.0 else 0.0),
        atom_at_one=True,
    )


def two_atom_law(p: float, x: float) -> ChargeLaw1:
    """Charge 1 with probability p, x in (-inf, 1) otherwise."""
    if not (0.0 < p < 1.0) or not (x < 1.0):
        raise InvalidParameterError("need 0 < p < 1 and x < 1")

    def geq(v):
        if v == NEG_INF or v <= x:
            return 1.0
        return p if v <= 1.0 else 0.0

    return ChargeLaw1(
        name=f"two-atom:{p},{x}",
        sampler=lambda gen, size: np.where(gen.random(size) < p, 1.0, x),
        mass_geq=geq,
        atom_at_one=True,
    )


# ---------------------------------------------------------------------------
# deterministic dynamics

class _Row:
    """A lazily extended column of i.i.d. charges with prefix maxima."""

    __slots__ = ("law", "gen", "values", "prefix_max")

    def __init__(self, law: ChargeLaw1, gen: np.random.Generator):
        self.law = law
        self.gen = gen
        self.values: list[float] = []
        self.prefix_max: list[float] = []

    def get(self, k: int) -> float:
        """1-based entry, drawing new blocks on demand."""
        while len(self.values) < k:
            block = self.law.sample_block(self.gen, max(8, len(self.values)))
            for v in block:
                v = float(v)
                self.values.append(v)
                top = self.prefix_max[-1] if self.prefix_max else NEG_INF
                self.prefix_max.append(max(top, v))
        return self.values[k - 1]

    def pmax(self, k: int) -> float:
        self.get(k)
        return self.prefix_max[k - 1]

    def drawn(self) -> int:
        return len(self.values)


def m_value(nu: PointMeasure, w) -> float:
    """sup_k (k-th largest location + k-th column entry).

    `w` may be an array-like or a lazily sampled column; since entries
    never exceed 1 the scan stops as soon as the next location cannot
    improve on the current best, so only finitely many entries are ever
    materialized.
    """
    if nu.size() == 0:
        raise InvalidParameterError("the measure must hold at least one particle")
    get = w.get if hasattr(w, "get") else lambda k: w[k - 1]
    limit = len(w.values) if hasattr(w, "values") else len(w)
    best = NEG_INF
    for k, loc in enumerate(nu.locations, start=1):
        if loc + 1.0 <= best:
            break
        if not hasattr(w, "get") and k > limit:
            break
        best = max(best, loc + get(k))
    return best


def mgs_step(nu: PointMeasure, w) -> PointMeasure:
    """One growth step: add a particle at the supremum location."""
    out = PointMeasure(locations=list(nu.locations), neg_inf_count=nu.neg_inf_count)
    out.add(m_value(nu, w))
    return out


# ---------------------------------------------------------------------------
# perfect simulation

def _validate_ell(law: ChargeLaw1, ell: float) -> None:
    # P(w >= 1-ell) = 1 (a charge law concentrated at the top) is allowed:
    # the backward search then stops immediately at t = -1.
    if not (0.0 <= ell < 1.0):
        raise InvalidParameterError("ell must lie in [0, 1)")
    p_high = law.mass_geq(1.0 - ell)
    if p_high <= 0.0:
        raise InvalidParameterError(
            f"need P(w >= 1-ell) > 0; got {p_high} for ell={ell}"
        )
    if law.mass_geq(ell) <= 0.0:
        raise InvalidParameterError(f"need P(w >= ell) > 0; got 0 for ell={ell}")


def perfect_sample(
    law: ChargeLaw1, ell: float, rng, t_cap: int = 10**6
) -> tuple[float, int]:
    """One exact draw of the stationary time-0 increment; returns
    (increment, T*).

    Backward search: T* is the latest t <= -1 whose first entry is >= ell
    and such that every later column t+j holds a value >= 1 - ell among
    its first j entries.  Forward phase: grow the system from a single
    particle at 0 across columns T*+1..-1 and evaluate the increment with
    column 0.  The positive part of the increment has expectation C(F).
    """
    increment, t_star, _, _ = perfect_sample_debug(law, ell, rng, t_cap)
    return increment, t_star


def perfect_sample_debug(law: ChargeLaw1, ell: float, rng, t_cap: int = 10**6):
    """perfect_sample plus the materialized rows and the final measure."""
    _validate_ell(law, ell)
    gen = as_generator(rng)
    rows: dict[int, _Row] = {}

    def row(t: int) -> _Row:
        r = rows.get(t)
        if r is None:
            r = _Row(law, gen)
            rows[t] = r
        return r

    threshold = 1.0 - ell
    t = 0
    J = 1
    row(0).get(1)
    while True:
        # ensure column t holds a value >= 1 - ell among its first J entries
        while row(t).pmax(J) < threshold:
            J += 1
        while J > 1:
            J -= 1
            t -= 1
            if -t > t_cap:
                raise ResourceError("backward search exceeded its budget; retry with a new stream")
            while row(t).pmax(J) < threshold:
                J += 1
        t -= 1
        if -t > t_cap:
            raise ResourceError("backward search exceeded its budget; retry with a new stream")
        if row(t).get(1) >= ell:
            break
    t_star = t

    nu = PointMeasure.delta(0.0)
    for s in range(t_star + 1, 0):
        nu.add(m_value(nu, row(s)))
    increment = m_value(nu, row(0)) - nu.locations[0]
    return increment, t_star, rows, nu


def brute_force_t_star(rows: dict, ell: float, lo: int) -> int | None:
    """Reference implementation of the decoupling time from materialized
    rows (tests feed the same cached rows the search used)."""
    for t in range(-1, lo - 1, -1):
        if rows[t].get(1) < ell:
            continue
        if all(rows[t + j].pmax(j) >= 1.0 - ell for j in range(1, -t + 1)):
            return t
    return None


@dataclass(frozen=True)
class EstimateReport:
    summary: MonteCarloSummary
    mean_tstar_sq: float
    tstar_sq: np.ndarray


def estimate_CF(law: ChargeLaw1, ell: float | None, N: int, seed: int = 0) -> EstimateReport:
    """Average of N i.i.d. perfect samples of the positive increment,
    with the empirical law of (T*)^2 attached."""
    if N < 2:
        raise InvalidParameterError("need at least two samples")
    if ell is None:
        ell = law.default_ell()
    values = np.empty(N)
    tsq = np.empty(N)
    for i in range(N):
        inc, t_star = perfect_sample(law, ell, RngStream(seed, i))
        values[i] = max(inc, 0.0)
        tsq[i] = t_star * t_star
    return EstimateReport(
        summary=MonteCarloSummary.from_values(values),
        mean_tstar_sq=float(tsq.mean()),
        tstar_sq=tsq,
    )


def complexity_profile(law: ChargeLaw1, ell_grid, N: int, seed: int = 0):
    """(ell, mean squared backward depth) rows for tuning the search."""
    rows = []
    for gi, ell in enumerate(ell_grid):
        rep = estimate_CF(law, ell, N, seed=seed + 7919 * gi)
        rows.append((float(ell), rep.mean_tstar_sq))
    return rows


# ---------------------------------------------------------------------------
# debiased estimation for unbounded charge laws

def glynn_rhee_sample(family, nu_law_masses, rng) -> float:
    """Debiased draw for a law approximated by truncations: sample a level
    nu, couple perfect samples at levels nu and nu-1 on a shared stream,
    and return their difference divided by the level's probability.

    `family(n)` must return (ChargeLaw1, scale) where the law is the
    level-n truncation rescaled to essential supremum 1 and `scale`
    multiplies the increment back; level 0 is the constant 0.
    """
    gen = as_generator(rng)
    levels = sorted(nu_law_masses)
    probs = [nu_law_masses[l] for l in levels]
    if any(p <= 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
        raise InvalidParameterError("level probabilities must be positive and sum to 1")
    u = gen.random()
    acc = 0.0
    level = levels[-1]
    for l, p in zip(levels, probs):
        acc += p
        if u < acc:
            level = l
            break
    seed = int(gen.integers(0, 2**63 - 1))

    def value_at(n: int) -> float:
        if n <= 0:
            return 0.0
        law, scale = family(n)
        inc, _ = perfect_sample(law, law.default_ell(), RngStream(seed))
        return scale * max(inc, 0.0)

    x_hi = value_at(level)
    x_lo = value_at(level - 1)
    return (x_hi - x_lo) / nu_law_masses[level]


def glynn_rhee_estimate(family, nu_law_masses, N: int, seed: int = 0) -> MonteCarloSummary:
    """Monte Carlo over debiased draws; the variance is always reported
    because the estimator can be heavy-tailed."""
    values = [
        glynn_rhee_sample(family, nu_law_masses, RngStream(seed, i)) for i in range(N)
    ]
    return MonteCarloSummary.from_values(values)
