"""Modular vectors, the root flat, and the layer coordinates of D_n(m).

Vertices of the torus are vectors over Z_m.  The layer of a vertex is its
coordinate sum, every generator e_i raises the layer by one, and
``iota(t, x) = x - t*e_{n-1}`` identifies each layer with the root flat
(vectors with zero coordinate sum).  Moving along e_i in the torus becomes
the root-flat step ``q_i = e_i - e_{n-1}`` (with ``q_{n-1} = 0``).

Root-flat points are indexed by the base-m value of their first n-1
coordinates, w_0 most significant; the last coordinate is the dependent one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


def _check_params(n: int, m: int) -> None:
    if n < 2:
        raise ValueError(f"dimension n must be >= 2, got {n}")
    if m < 2:
        raise ValueError(f"modulus m must be >= 2, got {m}")


@dataclass(frozen=True)
class ModVec:
    """A vector in (Z_m)^n with canonical entries in [0, m)."""

    entries: tuple[int, ...]
    m: int

    def __post_init__(self):
        _check_params(len(self.entries), self.m)
        object.__setattr__(self, "entries", tuple(int(e) % self.m for e in self.entries))

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def zero(cls, n: int, m: int) -> "ModVec":
        return cls((0,) * n, m)

    @classmethod
    def basis(cls, i: int, n: int, m: int) -> "ModVec":
        """The generator e_i."""
        if not 0 <= i < n:
            raise ValueError(f"basis index {i} outside [0, {n})")
        return cls(tuple(1 if j == i else 0 for j in range(n)), m)

    def _same_space(self, other: "ModVec") -> None:
        if self.n != other.n or self.m != other.m:
            raise ValueError(f"shape mismatch: (n={self.n}, m={self.m}) vs (n={other.n}, m={other.m})")

    def __add__(self, other: "ModVec") -> "ModVec":
        self._same_space(other)
        return ModVec(tuple(a + b for a, b in zip(self.entries, other.entries)), self.m)

    def __sub__(self, other: "ModVec") -> "ModVec":
        self._same_space(other)
        return ModVec(tuple(a - b for a, b in zip(self.entries, other.entries)), self.m)

    def __neg__(self) -> "ModVec":
        return ModVec(tuple(-a for a in self.entries), self.m)

    def scale(self, k: int) -> "ModVec":
        return ModVec(tuple(k * a for a in self.entries), self.m)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class RootFlatPoint(ModVec):
    """A ModVec whose coordinates sum to 0 mod m."""

    def __post_init__(self):
        super().__post_init__()
        if sum(self.entries) % self.m:
            raise ValueError(f"{self.entries} is not on the root flat (sum != 0 mod {self.m})")

    @classmethod
    def from_index(cls, index: int, n: int, m: int) -> "RootFlatPoint":
        _check_params(n, m)
        size = m ** (n - 1)
        if not 0 <= index < size:
            raise ValueError(f"root-flat index {index} outside [0, {size})")
        head = []
        for _ in range(n - 1):
            index, r = divmod(index, m)
            head.append(r)
        head.reverse()
        return cls(tuple(head) + (-sum(head) % m,), m)

    @classmethod
    def from_vec(cls, x: ModVec) -> "RootFlatPoint":
        return cls(x.entries, x.m)

    @property
    def index(self) -> int:
        idx = 0
        for e in self.entries[:-1]:
            idx = idx * self.m + e
        return idx


def rootflat_size(n: int, m: int) -> int:
    return m ** (n - 1)


def sigma(x: ModVec) -> int:
    """Layer of a vertex: the coordinate sum mod m."""
    return sum(x.entries) % x.m


def iota(t: int, x: ModVec) -> RootFlatPoint:
    """Map a vertex of layer t onto the root flat by subtracting t*e_{n-1}."""
    t %= x.m
    if sigma(x) != t:
        raise ValueError(f"vertex {x.entries} lies in layer {sigma(x)}, not {t}")
    return RootFlatPoint.from_vec(x - ModVec.basis(x.n - 1, x.n, x.m).scale(t))


def iota_inv(t: int, w: ModVec) -> ModVec:
    """Inverse of ``iota``: lift a root-flat point back to layer t."""
    if sigma(w) != 0:
        raise ValueError(f"{w.entries} is not on the root flat")
    return w + ModVec.basis(w.n - 1, w.n, w.m).scale(t)


def q(i: int, n: int, m: int) -> RootFlatPoint:
    """Root-flat direction q_i = e_i - e_{n-1}; q_{n-1} is zero."""
    if not 0 <= i < n:
        raise ValueError(f"direction {i} outside [0, {n})")
    return RootFlatPoint.from_vec(ModVec.basis(i, n, m) - ModVec.basis(n - 1, n, m))


def step_direction(w: RootFlatPoint, i: int) -> RootFlatPoint:
    return RootFlatPoint.from_vec(w + q(i, w.n, w.m))


def iter_rootflat(n: int, m: int) -> Iterator[RootFlatPoint]:
    for idx in range(rootflat_size(n, m)):
        yield RootFlatPoint.from_index(idx, n, m)


# -- dense helpers -----------------------------------------------------------


def small_dtype(m: int):
    return np.uint8 if m <= 255 else np.int64


def rootflat_coords(n: int, m: int) -> np.ndarray:
    """All root-flat points in index order, shape (m^(n-1), n)."""
    _check_params(n, m)
    size = rootflat_size(n, m)
    dt = small_dtype(m)
    out = np.empty((size, n), dtype=dt)
    idx = np.arange(size, dtype=np.int64)
    total = np.zeros(size, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        digit = idx % m
        out[:, i] = digit
        total += digit
        idx //= m
    out[:, n - 1] = (-total) % m
    return out


def encode_rootflat(coords: np.ndarray, m: int) -> np.ndarray:
    """Inverse of ``rootflat_coords`` row-wise (ignores the last column)."""
    coords = np.asarray(coords, dtype=np.int64)
    idx = np.zeros(coords.shape[0], dtype=np.int64)
    for i in range(coords.shape[1] - 1):
        idx = idx * m + coords[:, i]
    return idx


def place_values(n_digits: int, m: int) -> np.ndarray:
    """Place values of a base-m index with the first digit most significant."""
    return m ** np.arange(n_digits - 1, -1, -1, dtype=np.int64)


def vertex_index(x: Sequence[int], m: int) -> int:
    """Mixed-radix index of a torus vertex over all n coordinates (x_0 most significant)."""
    idx = 0
    for e in x:
        idx = idx * m + (int(e) % m)
    return idx


def vertex_from_index(index: int, n: int, m: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        index, r = divmod(index, m)
        out.append(r)
    return tuple(reversed(out))
