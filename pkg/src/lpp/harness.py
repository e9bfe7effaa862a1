"""Deterministic seeded randomness and Monte Carlo aggregation.

Every simulator in this package draws randomness through counter-based
Philox streams keyed by (seed, stream_index), so that replica i of a run is
a pure function of (seed, i) and runs can be reproduced bit-for-bit no
matter how replicas would be scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidParameterError",
    "ResourceError",
    "NumericError",
    "RngStream",
    "MonteCarloSummary",
    "as_generator",
    "sample_geometric",
    "geometric_block",
    "run_replicas",
]


class InvalidParameterError(ValueError):
    """An argument is outside the documented domain of an operation."""


class ResourceError(RuntimeError):
    """A computation exceeded its configured budget (population, horizon, ...)."""


class NumericError(ArithmeticError):
    """A numerical solve failed to meet its required residual."""


_U64 = np.uint64


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream_index).

    Identical (seed, stream_index) pairs yield identical byte streams;
    distinct stream indices yield statistically independent streams.
    """

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed % 2**64, self.stream_index % 2**64], dtype=_U64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, index: int) -> "RngStream":
        """Child stream; (seed, i) -> stream is a pure function."""
        return RngStream(self.seed, self.stream_index * 0x9E3779B9 + index + 1)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator, or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise InvalidParameterError(f"cannot interpret {rng!r} as a random source")


@dataclass(frozen=True)
class MonteCarloSummary:
    """Replica count, mean, sample variance, and a 95% normal half-width."""

    n: int
    mean: float
    variance: float
    ci95_halfwidth: float

    @classmethod
    def from_values(cls, values) -> "MonteCarloSummary":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n < 1:
            raise InvalidParameterError("cannot summarize zero replicas")
        mean = float(values.mean())
        var = float(values.var(ddof=1)) if n > 1 else 0.0
        var = max(var, 0.0)
        return cls(n=n, mean=mean, variance=var, ci95_halfwidth=1.96 * math.sqrt(var / n))

    def overlaps(self, other: "MonteCarloSummary", sigmas: float = 3.0) -> bool:
        """Whether the two means agree within a joint z-band."""
        joint = math.sqrt(self.variance / self.n + other.variance / other.n)
        return abs(self.mean - other.mean) <= sigmas * joint


def sample_geometric(p: float, rng) -> int:
    """Draw from P(i) = (1-p)^(i-1) p on {1,2,...} by inversion.

    For p < 1 this is ceil(ln U / ln(1-p)) with U uniform on (0,1).
    """
    if not (0.0 < p <= 1.0):
        raise InvalidParameterError(f"geometric parameter must be in (0,1], got {p}")
    if p == 1.0:
        return 1
    gen = as_generator(rng)
    u = 1.0 - gen.random()  # in (0, 1]
    return max(1, math.ceil(math.log(u) / math.log1p(-p)))


def geometric_block(p: float, size: int, gen: np.random.Generator) -> np.ndarray:
    """Vectorized version of :func:`sample_geometric`."""
    if not (0.0 < p <= 1.0):
        raise InvalidParameterError(f"geometric parameter must be in (0,1], got {p}")
    if p == 1.0:
        return np.ones(size, dtype=np.int64)
    u = 1.0 - gen.random(size)  # (0, 1]
    k = np.ceil(np.log(u) / math.log1p(-p)).astype(np.int64)
    return np.maximum(k, 1)


def run_replicas(task, n: int, seed: int) -> MonteCarloSummary:
    """Run n independent replicas of a seedable computation.

    `task(generator) -> float` runs on streams derive(seed, 0..n-1); the
    reduction is performed in replica-index order so the summary is
    bit-reproducible regardless of scheduling.
    """
    if n < 2:
        raise InvalidParameterError(f"need at least 2 replicas, got {n}")
    base = RngStream(seed)
    values = [float(task(RngStream(base.seed, i).generator())) for i in range(n)]
    return MonteCarloSummary.from_values(values)
