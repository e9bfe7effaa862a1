"""Directed random graph windows: sampling, longest/heaviest-path dynamic
programming, skeleton detection, the regenerative next-skeleton-point
construction, CLT experiments, and heavy-tailed weight experiments.

Vertices are 0..n and every potential edge points from the smaller to the
larger endpoint.  A vertex is a (window-)skeleton point when every smaller
vertex reaches it and it reaches every larger vertex; windows report a
superset of the infinite-graph skeleton near the boundaries, so gap
statistics always trim a margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .harness import (
    InvalidParameterError,
    MonteCarloSummary,
    ResourceError,
    RngStream,
    as_generator,
    geometric_block,
)

__all__ = [
    "EdgeLaw",
    "GraphWindow",
    "SkeletonReport",
    "sample_window",
    "longest_path_profile",
    "max_charge_profile",
    "skeleton_points",
    "skeleton_gap_pmf",
    "LazyColumnGraph",
    "NextSkeletonSample",
    "sample_next_skeleton_point",
    "next_skeleton_point",
    "clt_experiment",
    "CltReport",
    "heavy_edge_exponent",
    "HeavyEdgeReport",
    "heavy_tail_scaling",
    "gap_moment_diagnostic",
    "GapMomentReport",
    "window_longest_via_bins",
]

NEG_INF = -math.inf
_DENSE_LIMIT = 4000  # above this, presence is stored as packed bits
_CHARGE_LIMIT = 6000  # dense float charge matrices only up to this size


# ---------------------------------------------------------------------------
# edge laws and windows

@dataclass(frozen=True)
class EdgeLaw:
    """Distribution of a single potential edge.

    bernoulli(p): present with probability p, charge 1 (else no edge).
    two_atom(p, x): always present, charge 1 w.p. p else x (x may be -inf,
        which recovers bernoulli).
    continuous(name, sampler): always present, real charge <= 1 with
        essential supremum exactly 1.
    distance_dependent(probs): present with probability probs(j - i).
    """

    kind: str
    p: float | None = None
    x: float | None = None
    name: str | None = None
    sampler: object = None
    probs: object = None

    @classmethod
    def bernoulli(cls, p: float) -> "EdgeLaw":
        _check_prob(p)
        return cls(kind="bernoulli", p=p)

    @classmethod
    def two_atom(cls, p: float, x: float) -> "EdgeLaw":
        _check_prob(p)
        if x == NEG_INF:
            return cls.bernoulli(p)
        if x > 1:
            raise InvalidParameterError("charges live on (-inf, 1]")
        return cls(kind="two_atom", p=p, x=float(x))

    @classmethod
    def continuous(cls, name: str, sampler) -> "EdgeLaw":
        """`sampler(gen, size) -> array of charges in (-inf, 1]`."""
        return cls(kind="continuous", name=name, sampler=sampler)

    @classmethod
    def distance_dependent(cls, probs) -> "EdgeLaw":
        """`probs(d) -> probability` for an edge spanning distance d >= 1."""
        return cls(kind="distance_dependent", probs=probs)

    @property
    def presence_only(self) -> bool:
        return self.kind in ("bernoulli", "distance_dependent")

    def presence_probability(self, d: int) -> float:
        if self.kind == "bernoulli":
            return self.p
        if self.kind == "distance_dependent":
            return float(self.probs(d))
        return 1.0


def _check_prob(p):
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"probability {p} outside [0,1]")


@dataclass
class GraphWindow:
    """A sampled window on vertices 0..n.

    Presence-only laws store an adjacency (dense boolean for small n,
    packed bits beyond); charged laws store the dense charge matrix.
    """

    n: int
    law: EdgeLaw
    presence: np.ndarray | None = None  # dense bool (n+1, n+1), upper part
    packed: np.ndarray | None = None    # bit-packed rows, MSB first
    charges: np.ndarray | None = None   # float64 (n+1, n+1), upper part

    def has_edge(self, i: int, j: int) -> bool:
        if not 0 <= i < j <= self.n:
            return False
        if self.charges is not None:
            return self.charges[i, j] != NEG_INF
        if self.presence is not None:
            return bool(self.presence[i, j])
        byte, bit = divmod(j, 8)
        return bool(self.packed[i, byte] >> (7 - bit) & 1)

    def charge(self, i, j) -> float:
        if self.charges is not None:
            return float(self.charges[i, j])
        return 1.0 if self.has_edge(i, j) else NEG_INF

    def in_mask(self, j: int) -> np.ndarray:
        """Presence of edges (i, j) for i = 0..j-1."""
        if self.charges is not None:
            return self.charges[:j, j] != NEG_INF
        if self.presence is not None:
            return self.presence[:j, j]
        byte, bit = divmod(j, 8)
        return (self.packed[:j, byte] >> (7 - bit) & 1).astype(bool)

    def out_mask(self, i: int) -> np.ndarray:
        """Presence of edges (i, j) for j = i+1..n."""
        if self.charges is not None:
            return self.charges[i, i + 1:] != NEG_INF
        if self.presence is not None:
            return self.presence[i, i + 1:]
        row = np.unpackbits(self.packed[i])[: self.n + 1]
        return row[i + 1:].astype(bool)

    def in_charges(self, j: int) -> np.ndarray:
        """Charges of edges (i, j) for i = 0..j-1 (-inf where absent)."""
        if self.charges is not None:
            return self.charges[:j, j]
        return np.where(self.in_mask(j), 1.0, NEG_INF)


def sample_window(n: int, law: EdgeLaw, rng) -> GraphWindow:
    """Sample a window with i.i.d. charges; deterministic given the stream."""
    if n < 1:
        raise InvalidParameterError("window size must be >= 1")
    gen = as_generator(rng)
    if law.presence_only:
        if law.kind == "bernoulli":
            pvec = None
        else:
            pvec = np.array([law.presence_probability(d) for d in range(1, n + 1)])
        if n <= _DENSE_LIMIT:
            presence = np.zeros((n + 1, n + 1), dtype=bool)
            for i in range(n):
                u = gen.random(n - i)
                thr = law.p if pvec is None else pvec[: n - i]
                presence[i, i + 1:] = u < thr
            return GraphWindow(n=n, law=law, presence=presence)
        width = (n + 8) // 8
        packed = np.zeros((n + 1, width), dtype=np.uint8)
        row = np.zeros(n + 1, dtype=bool)
        for i in range(n):
            u = gen.random(n - i)
            thr = law.p if pvec is None else pvec[: n - i]
            row[:] = False
            row[i + 1:] = u < thr
            packed[i] = np.packbits(row)
        return GraphWindow(n=n, law=law, packed=packed)
    if n > _CHARGE_LIMIT:
        raise ResourceError(f"dense charge matrices are limited to n <= {_CHARGE_LIMIT}")
    charges = np.full((n + 1, n + 1), NEG_INF)
    for i in range(n):
        m = n - i
        if law.kind == "two_atom":
            charges[i, i + 1:] = np.where(gen.random(m) < law.p, 1.0, law.x)
        else:
            charges[i, i + 1:] = law.sampler(gen, m)
    return GraphWindow(n=n, law=law, charges=charges)


# ---------------------------------------------------------------------------
# path dynamic programming

def longest_path_profile(w: GraphWindow) -> list[int]:
    """L_j = maximal number of edges over paths ending at j (starting
    anywhere >= 0); exact integer dynamic programming."""
    if not w.law.presence_only and w.law.kind != "two_atom":
        pass  # any window works as long as presence is well defined
    L = np.zeros(w.n + 1, dtype=np.int64)
    for j in range(1, w.n + 1):
        mask = w.in_mask(j)
        if mask.any():
            L[j] = L[:j][mask].max() + 1
    return L.tolist()


def max_charge_profile(w: GraphWindow) -> list[float]:
    """W_{0,j} = maximal total charge over paths from 0 to j (-inf when
    j is unreachable); W_{0,0} = 0 by the empty-path convention."""
    W = np.full(w.n + 1, NEG_INF)
    W[0] = 0.0
    for j in range(1, w.n + 1):
        W[j] = (W[:j] + w.in_charges(j)).max()
    return W.tolist()


# ---------------------------------------------------------------------------
# skeleton detection

@dataclass(frozen=True)
class SkeletonReport:
    points: list[int]
    gaps: list[int]


def _nearest_neighbors(w: GraphWindow) -> tuple[np.ndarray, np.ndarray]:
    """nearest_in[j] = largest in-neighbor of j (-1 if none);
    nearest_out[i] = smallest out-neighbor of i (n+1 if none)."""
    n = w.n
    nearest_in = np.full(n + 1, -1, dtype=np.int64)
    nearest_out = np.full(n + 1, n + 1, dtype=np.int64)
    for j in range(1, n + 1):
        mask = w.in_mask(j)
        idx = np.flatnonzero(mask)
        if idx.size:
            nearest_in[j] = idx[-1]
    for i in range(n):
        mask = w.out_mask(i)
        idx = np.flatnonzero(mask)
        if idx.size:
            nearest_out[i] = i + 1 + idx[0]
    return nearest_in, nearest_out


def skeleton_points(w: GraphWindow) -> SkeletonReport:
    """Vertices v with a path from every u < v and to every u > v inside
    the window (a superset of the true skeleton near the boundaries):
    v qualifies iff every later vertex has an in-neighbor >= v and every
    earlier vertex has an out-neighbor <= v."""
    if not w.law.presence_only:
        raise InvalidParameterError("skeleton detection applies to presence-type laws")
    n = w.n
    nearest_in, nearest_out = _nearest_neighbors(w)
    # suffix minimum of nearest_in over (v, n], prefix maximum of nearest_out over [0, v)
    suf = np.empty(n + 2, dtype=np.int64)
    suf[n + 1] = np.iinfo(np.int64).max
    for v in range(n, 0, -1):
        suf[v] = min(suf[v + 1], nearest_in[v])
    pre = np.empty(n + 1, dtype=np.int64)
    run = -1
    for v in range(n + 1):
        pre[v] = run
        run = max(run, nearest_out[v])
    points = [v for v in range(n + 1) if suf[v + 1] >= v and pre[v] <= v]
    gaps = np.diff(points).tolist() if len(points) > 1 else []
    return SkeletonReport(points=points, gaps=gaps)


def _reach_from_zero(w: GraphWindow) -> np.ndarray:
    reach = np.zeros(w.n + 1, dtype=bool)
    reach[0] = True
    for j in range(1, w.n + 1):
        reach[j] = bool((w.in_mask(j) & reach[:j]).any())
    return reach


def _reach_to_n(w: GraphWindow) -> np.ndarray:
    reach = np.zeros(w.n + 1, dtype=bool)
    reach[w.n] = True
    for i in range(w.n - 1, -1, -1):
        reach[i] = bool((w.out_mask(i) & reach[i + 1:]).any())
    return reach


def _pairwise_reachability(w: GraphWindow) -> np.ndarray:
    """reach[i, j] for i < j, via descending-source bitset closure."""
    n = w.n
    reach = np.zeros((n + 1, n + 1), dtype=bool)
    for i in range(n - 1, -1, -1):
        out = w.out_mask(i)
        row = reach[i]
        row[i + 1:] |= out
        for j in np.flatnonzero(out):
            row |= reach[i + 1 + j]
    return reach


def gap_event_occurs(w: GraphWindow) -> bool:
    """The window event whose probability equals the skeleton gap mass at
    the window size: 0 reaches everything, everything reaches n, and no
    interior vertex is two-sided connected to all others."""
    n = w.n
    if not _reach_from_zero(w).all():
        return False
    if not _reach_to_n(w).all():
        return False
    if n <= 2:
        return n == 1  # size 1 always qualifies; size 2 never does
    reach = _pairwise_reachability(w)
    for j in range(1, n):
        two_sided = all(
            reach[min(i, j), max(i, j)] for i in range(n + 1) if i != j
        )
        if two_sided:
            return False
    return True


def skeleton_gap_pmf(p: float, n_max: int, reps: int, seed: int = 0):
    """Monte Carlo estimate of P(gap = n) for n = 1..n_max via the window
    event above on fresh windows; rows of (n, estimate, ci95)."""
    if not (0.0 < p < 1.0):
        raise InvalidParameterError("need 0 < p < 1")
    law = EdgeLaw.bernoulli(p)
    rows = []
    for n in range(1, n_max + 1):
        hits = 0
        for r in range(reps):
            w = sample_window(n, law, RngStream(seed, n * reps + r))
            hits += gap_event_occurs(w)
        est = hits / reps
        ci = 1.96 * math.sqrt(est * (1.0 - est) / reps)
        rows.append((n, est, ci))
    return rows


# ---------------------------------------------------------------------------
# lazy columns and the next-skeleton-point construction

class LazyColumnGraph:
    """Edge presence sampled on demand, one edge at a time, cached.

    Suitable for the stopping-time construction, where only a vanishing
    fraction of the quadratically many window edges is ever examined.
    """

    def __init__(self, law: EdgeLaw, gen: np.random.Generator):
        if not law.presence_only:
            raise InvalidParameterError("lazy columns need a presence-type law")
        self.law = law
        self.gen = gen
        self.cache: dict[tuple[int, int], bool] = {}

    def has_edge(self, i: int, j: int) -> bool:
        key = (i, j)
        hit = self.cache.get(key)
        if hit is None:
            hit = bool(self.gen.random() < self.law.presence_probability(j - i))
            self.cache[key] = hit
        return hit

    def nearest_out(self, u: int, cap: int) -> int | None:
        """Smallest j in (u, u+cap] with an edge (u, j), else None."""
        for d in range(1, cap + 1):
            if self.has_edge(u, u + d):
                return u + d
        return None

    def has_in_edge_from(self, lo: int, m: int) -> bool:
        """Whether m has an in-neighbor in [lo, m-1] (scans nearest first)."""
        for d in range(1, m - lo + 1):
            if self.has_edge(m - d, m):
                return True
        return False


def _tail_margin(law: EdgeLaw, tol: float = 1e-12, cap: int = 10**6) -> int:
    """Margin W with sum_{j > W} Q_j below tol, Q_j the no-edge-within-j
    probability; beyond it an unbroken connectivity run is certified."""
    big_q = 1.0
    tail_js = []
    total = 0.0
    j = 0
    while j < cap:
        j += 1
        big_q *= 1.0 - law.presence_probability(j)
        if big_q == 0.0:
            return j
        ratio = 1.0 - law.presence_probability(j + 1)
        if ratio < 1.0 and big_q * ratio / (1.0 - ratio) < tol:
            return j
    raise ResourceError("could not certify a summable connectivity tail")


@dataclass(frozen=True)
class NextSkeletonSample:
    vertex: int
    attempts: int  # number of interlaced rounds; geometric on success prob


def sample_next_skeleton_point(
    law: EdgeLaw,
    rng,
    condition_on_origin: bool = False,
    tail_tol: float = 1e-12,
    max_vertex: int = 10**6,
) -> NextSkeletonSample:
    """Run the interlaced stopping-time construction on a lazy graph.

    Alternates between the first vertex receiving paths from everything
    since the previous base (always finite) and the first failure of the
    forward-connectivity run (infinite with positive probability, which
    ends the recursion); failure beyond the certified margin never shows
    up at tail_tol precision.  With `condition_on_origin`, whole runs are
    rejected until the origin reaches every explored vertex, which turns
    the returned vertex into a draw from the skeleton gap law.
    """
    gen = as_generator(rng)
    if law.presence_probability(1) <= 0.0:
        raise InvalidParameterError("construction needs a positive nearest-edge probability")
    margin = _tail_margin(law, tail_tol)
    while True:
        g = LazyColumnGraph(law, gen)
        sample = _construct_next_point(g, margin, max_vertex)
        if not condition_on_origin:
            return sample
        horizon = sample.vertex + margin
        if all(g.has_in_edge_from(0, m) for m in range(1, horizon + 1)):
            return sample


def _construct_next_point(g: LazyColumnGraph, margin: int, max_vertex: int) -> NextSkeletonSample:
    base = 0
    scan_from = 1
    attempts = 0
    while True:
        # next candidate: first j >= scan_from such that every u in
        # [base, j-1] has an out-neighbor <= j
        j = scan_from
        reach_needed = base
        while True:
            m = reach_needed
            for u in range(max(reach_needed, base), j):
                nxt = g.nearest_out(u, max_vertex - u)
                if nxt is None:
                    raise ResourceError("no out-edge found within the vertex budget")
                m = max(m, nxt)
            reach_needed = j
            if m <= j:
                candidate = j
                break
            j = m
            if j > max_vertex:
                raise ResourceError("candidate scan exceeded the vertex budget")
        attempts += 1
        # forward-connectivity run from the candidate
        failed_at = None
        for m in range(candidate + 1, candidate + margin + 1):
            if not g.has_in_edge_from(candidate, m):
                failed_at = m
                break
        if failed_at is None:
            return NextSkeletonSample(vertex=candidate, attempts=attempts)
        base = candidate
        scan_from = failed_at + 1
        if scan_from > max_vertex:
            raise ResourceError("construction exceeded the vertex budget")


def next_skeleton_point(law: EdgeLaw, rng, condition_on_origin: bool = False) -> int:
    """Vertex reached by the stopping-time construction (see
    :func:`sample_next_skeleton_point`)."""
    return sample_next_skeleton_point(law, rng, condition_on_origin).vertex


# ---------------------------------------------------------------------------
# window longest path via the equivalent bin recursion (fast simulator)

def _front_from_letters_py(letters: np.ndarray) -> int:
    rev = np.zeros(letters.size + 2, dtype=np.int64)
    rev[0] = 1
    top = 0
    front = 0
    for t in range(letters.size):
        xi = letters[t]
        if xi <= rev[top]:
            top += 1
            rev[top] = 1
            front += 1
        else:
            cum = 0
            i = top
            placed = False
            while i >= 0:
                cum += rev[i]
                if cum >= xi:
                    rev[i + 1] += 1
                    placed = True
                    break
                i -= 1
            if not placed:
                rev[0] += 1
    return front


try:  # pragma: no cover - exercised when numba is installed
    from numba import njit

    _front_from_letters = njit(cache=True)(_front_from_letters_py)
except Exception:  # pragma: no cover
    _front_from_letters = _front_from_letters_py


def window_longest_via_bins(n: int, p: float, gen: np.random.Generator) -> int:
    """Maximal path length over a p-connectivity window of n vertices,
    simulated through the equivalent ordered-ball recursion in O(n)
    expected time (exact in law, vertex by vertex)."""
    if n < 1:
        raise InvalidParameterError("need n >= 1")
    if p >= 1.0:
        return n - 1
    letters = geometric_block(p, n - 1, gen)
    return int(_front_from_letters(letters))


# ---------------------------------------------------------------------------
# CLT experiment

@dataclass(frozen=True)
class CltReport:
    sigma2: float
    ks_stat: float
    ks_threshold: float
    c_hat: float
    lambda_hat: float
    n_cycles: int
    degenerate: bool = False


def _normal_cdf(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))


def ks_statistic_normal(z: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance of a sample to the standard normal."""
    z = np.sort(np.asarray(z, dtype=float))
    n = z.size
    cdf = _normal_cdf(z)
    grid = np.arange(1, n + 1) / n
    return float(max((grid - cdf).max(), (cdf - (grid - 1.0 / n)).max()))


def _cycle_lengths(w: GraphWindow, trim: int) -> list[tuple[int, int]]:
    """(tied path length, gap) for consecutive interior skeleton points."""
    rep = skeleton_points(w)
    pts = [v for v in rep.points if trim <= v <= w.n - trim]
    out = []
    for a, b in zip(pts, pts[1:]):
        length = _tied_longest(w, a, b)
        out.append((length, b - a))
    return out


def _tied_longest(w: GraphWindow, a: int, b: int) -> int:
    """Longest path from a to b using only vertices in [a, b]."""
    size = b - a
    best = np.full(size + 1, -1, dtype=np.int64)
    best[0] = 0
    for j in range(1, size + 1):
        mask = w.in_mask(a + j)[a:]
        ok = mask & (best[:j] >= 0)
        if ok.any():
            best[j] = best[:j][ok].max() + 1
    if best[size] < 0:
        raise AssertionError("skeleton endpoints must be connected")
    return int(best[size])


def clt_experiment(p: float, n: int, reps: int, seed: int = 0) -> CltReport:
    """Estimate the cycle variance from inter-skeleton pieces and test the
    studentized window maxima against the standard normal.

    The plug-in growth constant comes from the same runs, so the
    normalization is a studentization approximation.
    """
    _check_prob(p)
    if p == 1.0:
        return CltReport(
            sigma2=0.0, ks_stat=0.0, ks_threshold=1.63 / math.sqrt(max(reps, 1)),
            c_hat=1.0, lambda_hat=1.0, n_cycles=0, degenerate=True,
        )
    if p == 0.0:
        raise InvalidParameterError("p = 0 has no paths at all")
    ls = np.array(
        [window_longest_via_bins(n, p, RngStream(seed, r).generator()) for r in range(reps)],
        dtype=float,
    )
    c_hat = float(ls.mean() / n)
    # i.i.d. cycles from moderate windows
    from .euler import skeleton_rate

    lam = skeleton_rate(p)
    trim = max(10, math.ceil(5.0 / lam))
    cycles: list[tuple[int, int]] = []
    window_n = min(4000, max(200, int(80 / lam)))
    widx = 0
    while len(cycles) < 2000 and widx < 60:
        w = sample_window(window_n, EdgeLaw.bernoulli(p), RngStream(seed, 10_000 + widx))
        cycles.extend(_cycle_lengths(w, trim))
        widx += 1
    gaps = np.array([g for _, g in cycles], dtype=float)
    lens = np.array([l for l, _ in cycles], dtype=float)
    lambda_hat = 1.0 / gaps.mean()
    sigma2 = float(np.var(lens - c_hat * gaps, ddof=1))
    z = (ls - c_hat * n) / math.sqrt(sigma2 * lambda_hat * n)
    return CltReport(
        sigma2=sigma2,
        ks_stat=ks_statistic_normal(z),
        ks_threshold=1.63 / math.sqrt(reps),
        c_hat=c_hat,
        lambda_hat=float(lambda_hat),
        n_cycles=len(cycles),
    )


# ---------------------------------------------------------------------------
# heavy-tailed edge weights

def _pareto_block(s: float):
    def sampler(gen: np.random.Generator, size: int) -> np.ndarray:
        return gen.pareto(s, size) + 1.0

    return sampler


@dataclass(frozen=True)
class HeavyEdgeReport:
    slope: float
    log_sizes: list[float]
    log_heaviest: list[float]


def heavy_edge_exponent(
    s: float, n_grid, reps: int, seed: int = 0, weight_sampler=None
) -> HeavyEdgeReport:
    """Regression slope of log(heaviest geodesic edge) against log n on a
    complete window with heavy-tailed weights; the geodesic must be unique
    (continuous weights), otherwise an error is raised."""
    if s <= 2.0:
        raise InvalidParameterError("the heaviest-edge exponent needs tail index s > 2")
    sampler = weight_sampler or _pareto_block(s)
    xs, ys = [], []
    for gi, n in enumerate(n_grid):
        for r in range(reps):
            gen = RngStream(seed, gi * reps + r).generator()
            h = _heaviest_edge_on_geodesic(n, sampler, gen)
            xs.append(math.log(n))
            ys.append(math.log(h))
    slope = float(np.polyfit(xs, ys, 1)[0])
    return HeavyEdgeReport(slope=slope, log_sizes=xs, log_heaviest=ys)


def _heaviest_edge_on_geodesic(n: int, sampler, gen) -> float:
    W = np.empty(n + 1)
    W[0] = 0.0
    pred = np.zeros(n + 1, dtype=np.int64)
    used = np.zeros(n + 1)
    for j in range(1, n + 1):
        u = sampler(gen, j)
        vals = W[:j] + u
        a = int(np.argmax(vals))
        if np.count_nonzero(vals == vals[a]) > 1:
            raise InvalidParameterError("geodesic not unique under a degenerate weight law")
        W[j] = vals[a]
        pred[j] = a
        used[j] = u[a]
    h = 0.0
    v = n
    while v != 0:
        h = max(h, used[v])
        v = pred[v]
    return h


def heavy_tail_scaling(s: float, n: int, reps: int, seed: int = 0) -> np.ndarray:
    """Samples of the rescaled heaviest-path weight W_{0,n} / b_n on the
    complete window, where b_n is the (1 - 1/#edges)-quantile of the
    weight law; the limit law has no closed form, so the samples are for
    stability inspection only."""
    if not (0.0 < s < 2.0):
        raise InvalidParameterError("heavy-tail scaling needs 0 < s < 2")
    gen = RngStream(seed).generator()
    W = np.zeros((reps, n + 1))
    for j in range(1, n + 1):
        u = gen.pareto(s, (reps, j)) + 1.0
        W[:, j] = (W[:, :j] + u).max(axis=1)
    n_edges = n * (n + 1) // 2
    b_n = n_edges ** (1.0 / s)  # quantile of the unit Pareto law
    return W[:, n] / b_n


# ---------------------------------------------------------------------------
# gap-moment diagnostic

@dataclass(frozen=True)
class GapMomentReport:
    series_finite: bool
    series_value: float | None
    moment_small: float | None
    moment_large: float | None
    stable: bool
    flag: str


def gap_moment_diagnostic(
    probs, p_exponent: int, reps: int, seed: int = 0, rel_tol: float = 0.10
) -> GapMomentReport:
    """Check the p-th gap moment against the moment series sum k^p Q_k.

    If the series converges, the empirical p-th moment of skeleton gaps
    (sampled at `reps` and 4*`reps` replicas) must be stable; a divergent
    series raises the instability flag without sampling.
    """
    if p_exponent < 1:
        raise InvalidParameterError("moment exponent must be >= 1")
    law = EdgeLaw.distance_dependent(probs) if callable(probs) else EdgeLaw.bernoulli(probs)
    p1 = law.presence_probability(1)
    if not (0.0 < p1 <= 1.0):
        raise InvalidParameterError("need a positive nearest-edge probability")
    finite, value = _moment_series(law, p_exponent)
    if not finite:
        return GapMomentReport(
            series_finite=False, series_value=None,
            moment_small=None, moment_large=None,
            stable=False, flag="divergent-series",
        )
    if p1 == 1.0:
        return GapMomentReport(
            series_finite=True, series_value=value,
            moment_small=1.0, moment_large=1.0, stable=True, flag="ok",
        )

    def moment(count, offset):
        vals = [
            sample_next_skeleton_point(
                law, RngStream(seed, offset + i), condition_on_origin=True
            ).vertex ** p_exponent
            for i in range(count)
        ]
        return float(np.mean(vals))

    m_small = moment(reps, 0)
    m_large = moment(4 * reps, reps)
    stable = abs(m_small - m_large) <= rel_tol * max(abs(m_large), 1e-12)
    return GapMomentReport(
        series_finite=True, series_value=value,
        moment_small=m_small, moment_large=m_large,
        stable=stable, flag="ok" if stable else "unstable-moment",
    )


def _moment_series(law: EdgeLaw, p_exponent: int, cap: int = 200000) -> tuple[bool, float | None]:
    big_q = 1.0
    total = 0.0
    prev_term = None
    growing = 0
    for k in range(1, cap + 1):
        big_q *= 1.0 - law.presence_probability(k)
        term = k**p_exponent * big_q
        total += term
        if prev_term is not None:
            growing = growing + 1 if term >= prev_term * 0.999 else 0
            if growing > 200 and term > 1e-9:
                return False, None
        prev_term = term
        ratio = (1.0 - law.presence_probability(k + 1)) * ((k + 1) / max(k, 1)) ** p_exponent
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < 1e-12:
            return True, total
    return False, None
