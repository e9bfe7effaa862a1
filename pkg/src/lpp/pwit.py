"""Poisson-weighted infinite tree simulation, branching-random-walk
minimal displacement with selection, the red/blue embedding of the sparse
directed graph inside the tree, and sparse-regime path laws.

Each particle of the tree births children at the epochs of a unit-rate
Poisson process; generation counts grow like t^l/l! in mean and the
whole population like e^t (a pure birth process).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harness import (
    InvalidParameterError,
    ResourceError,
    RngStream,
    as_generator,
    geometric_block,
)

__all__ = [
    "PwitSnapshot",
    "simulate_pwit",
    "brw_min_displacement",
    "coupled_tree",
    "CoupledTrajectory",
    "sparse_longest",
    "SparseLongestReport",
    "shortest_path",
    "sparse_length_threshold",
    "dense_rate_root",
    "sample_sparse_edges",
]


@dataclass(frozen=True)
class PwitSnapshot:
    time: float
    counts: list[int]          # particles per generation
    front: int                 # largest generation alive
    population: int
    first_birth: list[float]   # minimal birth time per generation


def simulate_pwit(t_max: float, rng, population_cap: int = 10**7) -> PwitSnapshot:
    """Event-driven growth to time t_max; every particle births at unit
    rate, the child sitting one generation deeper."""
    if t_max < 0:
        raise InvalidParameterError("t_max must be >= 0")
    gen = as_generator(rng)
    counts = [1]
    first_birth = [0.0]
    population = 1
    t = 0.0
    while True:
        t += gen.exponential(1.0 / population)
        if t > t_max:
            break
        u = gen.random() * population
        acc = 0.0
        chosen = 0
        for g, c in enumerate(counts):
            acc += c
            if u < acc:
                chosen = g
                break
        child_gen = chosen + 1
        if child_gen == len(counts):
            counts.append(0)
            first_birth.append(t)
        counts[child_gen] += 1
        population += 1
        if population > population_cap:
            raise ResourceError(f"population exceeded {population_cap} before t_max")
    front = len(counts) - 1
    return PwitSnapshot(
        time=t_max, counts=list(counts), front=front,
        population=population, first_birth=list(first_birth),
    )


def brw_min_displacement(n: int, beam: int, rng) -> float:
    """Minimal displacement after n generations of the Poisson branching
    random walk with selection of the `beam` leftmost children.

    Exact selection: children are materialized inside a window wide
    enough to contain at least `beam` of them (Poisson counts per parent,
    uniform positions, with window extensions rather than resampling),
    then the leftmost `beam` survive.  The selection bias is upward and
    shrinks like 1/log(beam)^2.
    """
    if n < 1:
        raise InvalidParameterError("need at least one generation")
    if beam < 1:
        raise InvalidParameterError("beam must be >= 1")
    gen = as_generator(rng)
    xs = np.zeros(1)
    for _ in range(n):
        xs = _next_generation(xs, beam, gen)
    return float(xs.min())


def _next_generation(xs: np.ndarray, beam: int, gen: np.random.Generator) -> np.ndarray:
    lo = xs.min()
    width = max(1.0, 1.5 * beam / xs.size)
    cut = lo + width
    children = _children_in_window(xs, np.full(xs.size, -np.inf), cut, gen)

    # extend the window until enough children showed up
    while children.size < beam:
        new_cut = cut + max(1.0, width)
        children = np.concatenate(
            [children, _children_in_window(xs, np.full(xs.size, cut), new_cut, gen)]
        )
        cut = new_cut
    if children.size > beam:
        children = np.partition(children, beam - 1)[:beam]
    return children


def _children_in_window(xs, floor, cut, gen):
    """Children of parents xs inside (max(parent, floor), cut], exact by
    Poisson counts plus uniform positions."""
    starts = np.maximum(xs, floor)
    lengths = np.clip(cut - starts, 0.0, None)
    counts = gen.poisson(lengths)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    parents = np.repeat(np.arange(xs.size), counts)
    u = gen.random(total)
    return starts[parents] + u * lengths[parents]


# ---------------------------------------------------------------------------
# red/blue coupled tree

@dataclass(frozen=True)
class CoupledTrajectory:
    kappa: np.ndarray        # vertex labels of the connected component
    generations: np.ndarray  # tree depth of each vertex (= its path length)
    front: np.ndarray        # running maximum of the generations


def coupled_tree(p: float, steps: int, rng) -> CoupledTrajectory:
    """Grow the special spanning tree of the component of the root.

    The i-th new vertex arrives a geometric(1 - q^i) label gap after the
    previous one and picks the parent of rank r (ranking by tree depth,
    newest first within a depth) with probability q^(r-1)(1-q)/(1-q^i);
    a new vertex always takes rank 1.  The depth of vertex kappa_i equals
    the longest-path length from the root to it.
    """
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("need 0 < p < 1")
    gen = as_generator(rng)
    q = 1.0 - p
    kappa = np.empty(steps + 1, dtype=np.int64)
    gens = np.empty(steps + 1, dtype=np.int64)
    kappa[0] = 0
    gens[0] = 0
    # per-depth counts; rank order scans depths downward, newest-first ties
    depth_counts = [1]
    max_depth = 0
    label = 0
    for i in range(1, steps + 1):
        # label gap: geometric(1 - q^i)
        label += _geometric_one(1.0 - q**i, gen)
        kappa[i] = label
        # parent rank: truncated geometric with ratio q on {1..i}
        r = _truncated_geometric_rank(q, i, gen)
        # locate the depth of the rank-r particle
        acc = 0
        d = max_depth
        while True:
            acc += depth_counts[d]
            if acc >= r:
                break
            d -= 1
        child_depth = d + 1
        gens[i] = child_depth
        if child_depth > max_depth:
            depth_counts.append(0)
            max_depth = child_depth
        depth_counts[child_depth] += 1
    return CoupledTrajectory(
        kappa=kappa, generations=gens, front=np.maximum.accumulate(gens)
    )


def _geometric_one(p: float, gen) -> int:
    if p >= 1.0:
        return 1
    u = 1.0 - gen.random()
    return max(1, math.ceil(math.log(u) / math.log1p(-p)))


def _truncated_geometric_rank(q: float, i: int, gen) -> int:
    """Rank in {1..i} with P(r) proportional to q^(r-1)."""
    if q == 0.0:
        return 1
    u = gen.random() * (1.0 - q**i)
    return min(i, 1 + int(math.floor(math.log1p(-u) / math.log(q))))


# ---------------------------------------------------------------------------
# sparse-regime laws

def sample_sparse_edges(n: int, p: float, gen) -> tuple[np.ndarray, np.ndarray]:
    """Edge list of a sparse window on vertices 0..n-1 (i < j)."""
    total = n * (n - 1) // 2
    m = gen.binomial(total, p)
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    flat = gen.choice(total, size=m, replace=False)
    # decode linear indices of the strict upper triangle, row-major
    i = (n - 2 - np.floor(np.sqrt(-8.0 * flat + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(
        np.int64
    )
    j = (flat + i + 1 - i * (2 * n - i - 1) // 2).astype(np.int64)
    return i, j


def _longest_from_edges(n: int, i: np.ndarray, j: np.ndarray) -> int:
    if i.size == 0:
        return 0
    order = np.argsort(j, kind="stable")
    i, j = i[order], j[order]
    L = np.zeros(n, dtype=np.int64)
    # edges grouped by target, targets ascending
    starts = np.searchsorted(j, np.arange(n), side="left")
    ends = np.searchsorted(j, np.arange(n), side="right")
    for v in range(n):
        lo, hi = starts[v], ends[v]
        if lo < hi:
            L[v] = L[i[lo:hi]].max() + 1
    return int(L.max())


def sparse_length_threshold(n: int, p: float) -> int:
    """Largest k with binom(n, k) p^k <= 1 (computed in logs)."""
    if p <= 0.0:
        return 0
    log_term = 0.0
    k = 0
    while k < n:
        nxt = log_term + math.log((n - k) / (k + 1)) + math.log(p)
        if nxt > 0.0:
            break
        log_term = nxt
        k += 1
    return k


def dense_rate_root(gamma: float, tol: float = 1e-12) -> float:
    """Unique x > 1 solving x log x = 1/(e*gamma), by bisection."""
    if gamma <= 0.0:
        raise InvalidParameterError("gamma must be positive")
    target = 1.0 / (math.e * gamma)
    lo, hi = 1.0, 2.0
    while hi * math.log(hi) < target:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid * math.log(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SparseLongestReport:
    counts: dict[int, int]
    reps: int
    threshold: int           # the deterministic length threshold
    rate_root: float | None  # A(gamma) when p sits in the log n / n regime

    def probability(self, k: int) -> float:
        return self.counts.get(k, 0) / self.reps


def sparse_longest(n: int, p: float, reps: int, seed: int = 0) -> SparseLongestReport:
    """Empirical law of the maximal path length of a sparse window."""
    counts: dict[int, int] = {}
    for r in range(reps):
        gen = RngStream(seed, r).generator()
        i, j = sample_sparse_edges(n, p, gen)
        l = _longest_from_edges(n, i, j)
        counts[l] = counts.get(l, 0) + 1
    gamma = p * n / math.log(n) if n > 1 else None
    root = dense_rate_root(gamma) if gamma and gamma > 1e-9 else None
    return SparseLongestReport(
        counts=counts, reps=reps, threshold=sparse_length_threshold(n, p), rate_root=root
    )


def shortest_path(n: int, p: float, reps: int, seed: int = 0) -> dict[float, float]:
    """Empirical law of the minimal number of edges from the first to the
    last vertex (inf when disconnected)."""
    if n < 2:
        raise InvalidParameterError("need at least two vertices")
    counts: dict[float, int] = {}
    for r in range(reps):
        gen = RngStream(seed, r).generator()
        if n <= 2000:
            dist = _shortest_dense(n, p, gen)
        else:
            dist = _shortest_sparse(n, p, gen)
        counts[dist] = counts.get(dist, 0) + 1
    return {k: v / reps for k, v in counts.items()}


def _shortest_dense(n: int, p: float, gen) -> float:
    inf = math.inf
    d = np.full(n, inf)
    d[0] = 0.0
    for j in range(1, n):
        mask = gen.random(j) < p
        if mask.any():
            d[j] = d[:j][mask].min() + 1.0
    return float(d[n - 1])


def _shortest_sparse(n: int, p: float, gen) -> float:
    i, j = sample_sparse_edges(n, p, gen)
    inf = math.inf
    d = np.full(n, inf)
    d[0] = 0.0
    order = np.argsort(j, kind="stable")
    i, j = i[order], j[order]
    starts = np.searchsorted(j, np.arange(n), side="left")
    ends = np.searchsorted(j, np.arange(n), side="right")
    for v in range(1, n):
        lo, hi = starts[v], ends[v]
        if lo < hi:
            d[v] = d[i[lo:hi]].min() + 1.0
    return float(d[n - 1])
