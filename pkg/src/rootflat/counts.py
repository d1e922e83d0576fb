"""Count matrices, the symbol-count criterion, and layer schedules for m >= 7.

A count matrix has one row per color and one column per symbol, ordered
(0, D, 2, 3, 4, 5, 6).  A row is good when gcd(N_0, m) = 1 and every
N_k - N_D (k = 2..6) is a unit mod m; a word with those counts then returns
as a single m^6-cycle on Q_6 whatever thresholds the layers use.  Splitting
the matrix into m perfect matchings gives one color-to-symbol bijection per
layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BoundaryObstruction
from .prefix import Symbol, labels_array, rho_array, subtract_prefix

NUM_COLORS = 7
COLUMN_LABELS = ("0", "D", "2", "3", "4", "5", "6")

# Full translation u -> u - (1,...,1).  Only appears in words built to exercise
# the count criterion below dimension 6; schedules never contain it.
T = 7

_M7 = [
    [1, 2, 0, 0, 0, 0, 4],
    [1, 2, 0, 0, 0, 3, 1],
    [1, 1, 0, 0, 3, 2, 0],
    [1, 1, 0, 3, 2, 0, 0],
    [1, 1, 3, 2, 0, 0, 0],
    [1, 0, 2, 1, 1, 1, 1],
    [1, 0, 2, 1, 1, 1, 1],
]


def _family_6s1(s: int) -> list[list[int]]:
    return [
        [1, s + 1, s - 1, s - 1, s - 1, s - 1, s + 3],
        [1, s + 1, s - 1, s - 1, s - 1, s - 1, s + 3],
        [1, s + 1, s - 1, s - 1, s - 1, s + 2, s],
        [1, s, s + 1, s + 1, s + 1, s - 1, s - 2],
        [2, s - 1, s, s, s + 1, s + 1, s - 2],
        [2, s - 1, s + 1, s + 1, s, s, s - 2],
        [6 * s - 7, 0, 2, 2, 2, 1, 1],
    ]


def _family_6s3(s: int) -> list[list[int]]:
    return [
        [1, s + 2, s, s, s, s, s],
        [1, s + 2, s, s, s, s, s],
        [1, s + 2, s, s, s, s, s],
        [1, s - 1, s, s, s + 1, s + 1, s + 1],
        [2, s - 1, s, s, s, s + 1, s + 1],
        [2, s - 1, s + 1, s + 1, s, s, s],
        [6 * s - 5, 0, 2, 2, 2, 1, 1],
    ]


def _family_6s5(s: int) -> list[list[int]]:
    return [
        [1, s + 2, s, s, s, s + 1, s + 1],
        [1, s + 2, s, s, s, s + 1, s + 1],
        [1, s + 2, s, s, s, s + 1, s + 1],
        [1, s, s + 1, s + 1, s + 1, s - 1, s + 2],
        [2, s, s + 1, s + 1, s + 1, s + 1, s - 1],
        [2, s - 1, s + 1, s + 1, s + 1, s + 1, s],
        [6 * s - 3, 0, 2, 2, 2, 1, 1],
    ]


@dataclass(frozen=True)
class CountMatrix:
    """7x7 color-by-symbol counts; every row and column sums to m."""

    entries: np.ndarray
    m: int
    family: str = "custom"

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.shape != (NUM_COLORS, NUM_COLORS):
            raise ValueError(f"count matrix must be 7x7, got {a.shape}")
        if (a < 0).any():
            raise ValueError("count matrix has negative entries")
        if (a.sum(axis=1) != self.m).any() or (a.sum(axis=0) != self.m).any():
            raise ValueError(
                f"row sums {a.sum(axis=1).tolist()} / column sums {a.sum(axis=0).tolist()} are not all {self.m}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def row(self, color: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.entries[color])

    def rows_pass_criterion(self) -> list[bool]:
        return [check_count_criterion(self.row(k), self.m) for k in range(NUM_COLORS)]

    def format(self) -> str:
        width = max(2, len(str(self.m)))
        head = "color " + " ".join(c.rjust(width) for c in COLUMN_LABELS)
        lines = [head]
        for k in range(NUM_COLORS):
            lines.append(f"{k:>5} " + " ".join(str(v).rjust(width) for v in self.row(k)))
        return "\n".join(lines)


def count_matrix_for(m: int) -> CountMatrix:
    """The count matrix used for odd m >= 7 (family chosen by m mod 6)."""
    if m % 2 == 0:
        raise ValueError(f"m must be odd, got {m}")
    if m < 7:
        raise BoundaryObstruction(m)
    if m == 7:
        return CountMatrix(np.array(_M7), m, "m=7")
    s, rem = divmod(m, 6)
    if rem == 1:
        return CountMatrix(np.array(_family_6s1(s)), m, f"6s+1 (s={s})")
    if rem == 3:
        return CountMatrix(np.array(_family_6s3(s)), m, f"6s+3 (s={s})")
    return CountMatrix(np.array(_family_6s5(s)), m, f"6s+5 (s={s})")


def _is_unit(k: int, m: int) -> bool:
    return math.gcd(k % m, m) == 1


def check_count_criterion(row: Sequence[int], m: int) -> bool:
    """gcd(N_0, m) = 1 and gcd(N_k - N_D, m) = 1 for k = 2..6."""
    if len(row) != 7:
        raise ValueError(f"expected 7 counts, got {len(row)}")
    n0, nd = row[0], row[1]
    return _is_unit(n0, m) and all(_is_unit(row[k] - nd, m) for k in range(2, 7))


def word_counts(word: Sequence[tuple[int, int]], r: int) -> dict[int, int]:
    """Occurrences of each word symbol (0, D, 2..r, T)."""
    counts = {s: 0 for s in [0, 1, *range(2, r + 1), T]}
    for symbol, _ in word:
        if symbol not in counts:
            raise ValueError(f"symbol {symbol} not allowed in dimension {r}")
        counts[symbol] += 1
    return counts


def check_word_criterion(word: Sequence[tuple[int, int]], r: int, m: int) -> bool:
    """Count criterion in dimension r, with T counted among the nonzero symbols."""
    if len(word) != m:
        raise ValueError(f"word length {len(word)} != m = {m}")
    c = word_counts(word, r)
    return _is_unit(m - c[0], m) and all(_is_unit(c[k] - c[1], m) for k in range(2, r + 1))


# -- permutations --------------------------------------------------------------


def _as_perm(perm) -> np.ndarray:
    p = np.ascontiguousarray(perm, dtype=np.int64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("permutation must be a non-empty 1-d array")
    i, j = _kernels.first_duplicate(p)
    if i >= 0:
        if i == j:
            raise ValueError(f"image {p[i]} at position {i} is out of range")
        raise ValueError(f"not a permutation: positions {i} and {j} both map to {p[i]}")
    return p


def is_single_cycle(perm) -> bool:
    p = _as_perm(perm)
    return _kernels.orbit_length(p, 0) == p.size


def cycle_type(perm) -> list[int]:
    """Sorted cycle lengths of a permutation."""
    return sorted(_kernels.cycle_lengths(_as_perm(perm)).tolist())


def skew_product_cycle_check(base_perm, drift, m: int) -> bool:
    """Is (x, y) -> (A(x), y + drift(x)) one cycle on X x Z_m?  A must be one cycle on X."""
    base = _as_perm(base_perm)
    if _kernels.orbit_length(base, 0) != base.size:
        raise ValueError("base permutation is not a single cycle")
    drift = np.asarray(drift, dtype=np.int64)
    if drift.shape != base.shape:
        raise ValueError(f"drift has shape {drift.shape}, base has {base.shape}")
    return math.gcd(int(drift.sum()) % m, m) == 1


def skew_product_perm(base_perm, drift, m: int) -> np.ndarray:
    """The skew product as a permutation of X x Z_m, state (x, y) indexed x*m + y."""
    base = np.asarray(base_perm, dtype=np.int64)
    drift = np.asarray(drift, dtype=np.int64)
    x = np.repeat(np.arange(base.size), m)
    y = np.tile(np.arange(m), base.size)
    return base[x] * m + (y + drift[x]) % m


# -- word return maps over Q_r ------------------------------------------------


def prefix_space(r: int, m: int) -> np.ndarray:
    """All points of Q_r in index order (z_1 most significant), shape (m^r, r)."""
    size = m**r
    idx = np.arange(size, dtype=np.int64)
    out = np.empty((size, r), dtype=np.int64)
    for i in range(r - 1, -1, -1):
        out[:, i] = idx % m
        idx //= m
    return out


def encode_prefix(z: np.ndarray, m: int) -> np.ndarray:
    idx = np.zeros(z.shape[0], dtype=np.int64)
    for i in range(z.shape[1]):
        idx = idx * m + z[:, i]
    return idx


def apply_word_symbol(symbol: int, tau: int, z: np.ndarray, m: int) -> np.ndarray:
    """One layer map (including T) applied row-wise to an (N, r) array."""
    dim = z.shape[1]
    if symbol == T:
        labels = np.full(z.shape[0], dim, dtype=np.int64)
    elif symbol in (Symbol.ZERO, Symbol.DELTA) or 2 <= symbol <= dim:
        labels = labels_array(symbol, rho_array(tau % m, z), dim)
    else:
        raise ValueError(f"symbol {symbol} is not available in dimension {dim}")
    return subtract_prefix(z, labels, m)


def word_return_map(word: Sequence[tuple[int, int]], r: int, m: int) -> np.ndarray:
    """Dense permutation of Q_r for the word's layer maps, first pair applied first."""
    if len(word) != m:
        raise ValueError(f"word length {len(word)} != m = {m}")
    if not 1 <= r <= 6:
        raise ValueError(f"dimension r must be in 1..6, got {r}")
    for symbol, _ in word:
        if symbol != T and symbol not in (0, 1) and not 2 <= symbol <= r:
            raise ValueError(f"symbol {symbol} is not available in dimension {r}")
    z = prefix_space(r, m)
    for symbol, tau in word:
        z = apply_word_symbol(symbol, tau, z, m)
    return encode_prefix(z, m)


# -- perfect matchings ---------------------------------------------------------


def _perfect_matching(mult: np.ndarray) -> list[int]:
    """Kuhn's augmenting paths on the support of ``mult``; colors and symbols scanned low to high."""
    size = mult.shape[0]
    owner = [-1] * size  # symbol -> color

    def augment(color: int, seen: list[bool]) -> bool:
        for symbol in range(size):
            if mult[color, symbol] > 0 and not seen[symbol]:
                seen[symbol] = True
                if owner[symbol] < 0 or augment(owner[symbol], seen):
                    owner[symbol] = color
                    return True
        return False

    for color in range(size):
        if not augment(color, [False] * size):
            raise ValueError("no perfect matching; matrix is not regular")
    match = [-1] * size
    for symbol, color in enumerate(owner):
        match[color] = symbol
    return match


def matching_decomposition(matrix: CountMatrix) -> list[tuple[int, ...]]:
    """Split the matrix into m color->symbol bijections whose 0/1 matrices sum to it."""
    remaining = np.array(matrix.entries, dtype=np.int64)
    layers = []
    for _ in range(matrix.m):
        match = _perfect_matching(remaining)
        for color, symbol in enumerate(match):
            remaining[color, symbol] -= 1
        layers.append(tuple(match))
    assert not remaining.any()
    return layers


# -- schedules -----------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """Per layer t: symbols[t][color] (a bijection onto the 7 symbols) and a threshold."""

    symbols: tuple[tuple[int, ...], ...]
    thresholds: tuple[int, ...]
    m: int
    matrix: CountMatrix | None = field(default=None, compare=False)

    def __post_init__(self):
        symbols = tuple(tuple(int(s) for s in layer) for layer in self.symbols)
        thresholds = tuple(int(t) % self.m for t in self.thresholds)
        if len(symbols) != self.m or len(thresholds) != self.m:
            raise ValueError(f"schedule needs {self.m} layers and thresholds, got {len(symbols)}/{len(thresholds)}")
        for t, layer in enumerate(symbols):
            if sorted(layer) != list(range(NUM_COLORS)):
                raise ValueError(f"layer {t} does not use every symbol exactly once: {layer}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "thresholds", thresholds)

    def word(self, color: int) -> list[tuple[int, int]]:
        return [(self.symbols[t][color], self.thresholds[t]) for t in range(self.m)]

    def color_counts(self, color: int) -> tuple[int, ...]:
        counts = [0] * NUM_COLORS
        for layer in self.symbols:
            counts[layer[color]] += 1
        return tuple(counts)

    def counts_matrix(self) -> np.ndarray:
        return np.array([self.color_counts(k) for k in range(NUM_COLORS)], dtype=np.int64)


def build_schedule(m: int, thresholds: Sequence[int] | None = None) -> Schedule:
    matrix = count_matrix_for(m)
    if thresholds is None:
        thresholds = [0] * m
    elif len(thresholds) != m:
        raise ValueError(f"need {m} thresholds, got {len(thresholds)}")
    schedule = Schedule(tuple(matching_decomposition(matrix)), tuple(thresholds), m, matrix)
    for k in range(NUM_COLORS):
        if not check_count_criterion(schedule.color_counts(k), m):
            raise AssertionError(f"color {k} fails the count criterion for m={m}")
    return schedule


def cyclic_schedule(m: int, thresholds: Sequence[int] | None = None) -> Schedule:
    """Layer t gives color k the symbol (k + t) mod 7.  Valid for any m; used at the boundary."""
    symbols = tuple(tuple((k + t) % NUM_COLORS for k in range(NUM_COLORS)) for t in range(m))
    return Schedule(symbols, tuple(thresholds or [0] * m), m)
