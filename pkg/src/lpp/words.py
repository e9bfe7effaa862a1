"""Exact combinatorics of selection words.

A selection word is applied letter by letter to a ball-in-bins
configuration; we store the letters in application order (index 0 first).
Classification (good / bad / ambivalent), coupling numbers, minimal-word
enumeration, the integer coefficients of the growth constant's expansion
at p = 1, and truncated speed series all reduce to sweeping the word over
the finite projected chain: every letter is at most the projection order
kappa, so the ball placements depend on a configuration only through its
2^(kappa-1)-state projection, which makes the sweep a sound and complete
classifier.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .chainbounds import enumerate_states, transition_tables
from .harness import InvalidParameterError, ResourceError

__all__ = [
    "Word",
    "GOOD",
    "BAD",
    "AMBIVALENT",
    "is_triangular",
    "classify",
    "coupling_number",
    "is_minimal",
    "is_good",
    "minimal_word_counts",
    "a_coefficients",
    "a_coefficients_by_route",
    "speed_series_lower",
    "enumerate_words",
]

GOOD = "good"
BAD = "bad"
AMBIVALENT = "ambivalent"

A_N_CEILING = 10  # practical desk-scale ceiling for a_coefficients


@dataclass(frozen=True)
class Word:
    """A nonempty sequence of positive integers in application order."""

    letters: tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) == 0:
            raise InvalidParameterError("a selection word is nonempty")
        if any((not isinstance(a, int)) or a < 1 for a in self.letters):
            raise InvalidParameterError(f"letters must be positive integers: {self.letters}")

    @classmethod
    def of(cls, *letters: int) -> "Word":
        return cls(tuple(letters))

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def height(self) -> int:
        return sum(self.letters) - len(self.letters)

    @property
    def max_letter(self) -> int:
        return max(self.letters)

    def display(self) -> tuple[int, ...]:
        """Letters listed last-applied first (the conventional notation)."""
        return tuple(reversed(self.letters))

    def suffixes(self):
        """Strict suffixes: drop the earliest-applied letters one by one."""
        for j in range(1, len(self.letters)):
            yield self.letters[j:]


def _as_letters(word) -> tuple[int, ...]:
    if isinstance(word, Word):
        return word.letters
    return tuple(word)


def is_triangular(word) -> bool:
    """Whether the i-th applied letter is at most i (1-based)."""
    letters = _as_letters(word)
    return all(a <= i + 1 for i, a in enumerate(letters))


# ---------------------------------------------------------------------------
# state-set sweep over the projected chain, as bitmasks over all states

@lru_cache(maxsize=None)
def _sweep_tables(kappa: int):
    """Byte-indexed images of state sets under each letter, plus per-letter
    masks of the states whose front the letter advances."""
    states, targets, moved = transition_tables(kappa)
    n = len(states)
    n_bytes = (n + 7) // 8
    letter_images = {}
    move_masks = {}
    for letter in range(1, kappa + 1):
        img = [[0] * 256 for _ in range(n_bytes)]
        for s in range(n):
            bit = 1 << int(targets[s, letter])
            byte_idx, byte_bit = divmod(s, 8)
            for val in range(256):
                if val >> byte_bit & 1:
                    img[byte_idx][val] |= bit
        letter_images[letter] = img
        mask = 0
        for s in range(n):
            if moved[s, letter]:
                mask |= 1 << s
        move_masks[letter] = mask
    full = (1 << n) - 1
    return letter_images, move_masks, full, n_bytes


def _image(mask: int, img) -> int:
    out = 0
    idx = 0
    while mask:
        out |= img[idx][mask & 0xFF]
        mask >>= 8
        idx += 1
    return out


@lru_cache(maxsize=None)
def _classify_tuple(letters: tuple[int, ...]) -> str:
    kappa = max(2, max(letters))
    images, move_masks, full, _ = _sweep_tables(kappa)
    mask = full
    for a in letters[:-1]:
        mask = _image(mask, images[a])
    movers = mask & move_masks[letters[-1]]
    if movers == mask:
        return GOOD
    if movers == 0:
        return BAD
    return AMBIVALENT


def classify(word) -> str:
    """GOOD if the last letter advances the front from every configuration,
    BAD if from none, AMBIVALENT otherwise."""
    return _classify_tuple(_as_letters(word))


def is_good(word) -> bool:
    return classify(word) == GOOD


def coupling_number(word) -> int:
    """Largest k such that the top-k bin contents of the output are the
    same for every input configuration (0 when there is no such k).

    Tracked on an untrimmed region sweep: starting from each projected
    state, every ball placed by a letter <= kappa provably lands on or
    above the initial projection boundary, so the region of bins above
    that boundary evolves exactly; the coupling number is the longest
    common front profile across all start states, which can never extend
    past the shallowest region (the bin just below it keeps an arbitrary
    initial content).
    """
    letters = _as_letters(word)
    kappa = max(2, max(letters))
    regions = []
    for state in enumerate_states(kappa):
        region = list(reversed(state.word))  # front first
        for xi in letters:
            cum = 0
            placed = False
            for i, v in enumerate(region):
                cum += v
                if cum >= xi:
                    if i == 0:
                        region.insert(0, 1)
                    else:
                        region[i - 1] += 1
                    placed = True
                    break
            if not placed:
                if region:
                    region[-1] += 1  # ball lands just above the boundary
                else:
                    region.insert(0, 1)
        regions.append(region)
    depth = min(len(r) for r in regions)
    first = regions[0]
    k = 0
    for i in range(depth):
        if all(r[i] == first[i] for r in regions):
            k = i + 1
        else:
            break
    return k


def is_minimal(word, predicate) -> bool:
    """Whether the word satisfies `predicate` while no strict suffix does."""
    w = Word(_as_letters(word))
    return predicate(w.letters) and not any(predicate(s) for s in w.suffixes())


# ---------------------------------------------------------------------------
# minimal-word enumeration and the expansion coefficients

def enumerate_words(height: int, length: int):
    """All words with the given height and length (letters >= 1)."""
    # compositions of `height` into `length` nonnegative parts, shifted by 1
    def rec(h, l):
        if l == 1:
            yield (h + 1,)
            return
        for first in range(h + 1):
            for rest in rec(h - first, l - 1):
                yield (first + 1,) + rest

    yield from rec(height, length)


def _is_minimal_good(letters: tuple[int, ...]) -> bool:
    if _classify_tuple(letters) != GOOD:
        return False
    return not any(_classify_tuple(letters[j:]) == GOOD for j in range(1, len(letters)))


def _is_minimal_triangular_good(letters: tuple[int, ...]) -> bool:
    if not is_triangular(letters):
        return False
    if any(is_triangular(letters[j:]) for j in range(1, len(letters))):
        return False
    return _classify_tuple(letters) == GOOD


def minimal_word_counts(n_max: int) -> tuple[Counter, Counter]:
    """Counts of minimal good words and of minimal-triangular good words,
    keyed by (height, length), over heights <= n_max.

    Only words with length <= height + 1 can be minimal, which makes both
    families finite at each height.
    """
    good_min = Counter()
    tri_min_good = Counter()
    for h in range(n_max + 1):
        for l in range(1, h + 2):
            for letters in enumerate_words(h, l):
                if _is_minimal_good(letters):
                    good_min[(h, l)] += 1
                if _is_minimal_triangular_good(letters):
                    tri_min_good[(h, l)] += 1
    return good_min, tri_min_good


def _coefficients_from_counts(counts: Counter, n_max: int) -> list[int]:
    out = []
    for n in range(n_max + 1):
        a_n = 0
        for (h, l), c in counts.items():
            if 0 <= n - h <= l:
                a_n += (-1) ** h * math.comb(l, n - h) * c
        out.append(a_n)
    return out


def a_coefficients_by_route(n_max: int, ceiling: int = A_N_CEILING) -> tuple[list[int], list[int]]:
    """The expansion coefficients computed through both minimal-word
    families; callers may compare them as an exactness check."""
    if n_max < 0:
        raise InvalidParameterError("n_max must be >= 0")
    if n_max > ceiling:
        raise ResourceError(
            f"a_coefficients(n_max={n_max}) exceeds the configured ceiling {ceiling}"
        )
    good_min, tri_min_good = minimal_word_counts(n_max)
    return (
        _coefficients_from_counts(good_min, n_max),
        _coefficients_from_counts(tri_min_good, n_max),
    )


def a_coefficients(n_max: int, ceiling: int = A_N_CEILING) -> list[int]:
    """Integer coefficients a_0..a_n_max of the growth constant's power
    series at full connectivity, cross-computed through two distinct
    minimal-word families which must agree exactly."""
    via_good, via_tri = a_coefficients_by_route(n_max, ceiling)
    if via_good != via_tri:
        raise AssertionError(
            f"minimal-good and minimal-triangular routes disagree: {via_good} vs {via_tri}"
        )
    return via_good


def speed_series_lower(p: float, h_max: int) -> float:
    """Partial sum of the speed series over minimal-triangular good words
    of height <= h_max; a monotone lower approximation to the growth
    constant (every term is positive)."""
    if not (0.0 < p <= 1.0):
        raise InvalidParameterError(f"need 0 < p <= 1, got {p}")
    q = 1.0 - p
    total = 0.0
    for h in range(h_max + 1):
        for l in range(1, h + 2):
            for letters in enumerate_words(h, l):
                if _is_minimal_triangular_good(letters):
                    total += p**l * q**h
    return total
