"""Prefix coordinates on the 7-dimensional root flat and the seven layer maps.

``phi`` sends a root-flat point w to the suffix sums z_j = w_{7-j} + ... + w_6
(j = 1..6).  In these coordinates the step q_i becomes subtraction of the
prefix vector p_{6-i} = (1,...,1,0,...,0), so a layer map that subtracts p_r
uses Cayley direction 6 - r.

The seven symbols are ZERO, DELTA and the numeric symbols 2..6.  At a point z
with r = rho_tau(z) they subtract, respectively, p_0, p_r, and p_a (when
r < a) or p_{a-1} (when r >= a).  The integer value of a Symbol is its column
in a count matrix, so DELTA sits where the label 1 would be.

Prefix points are plain tuples of residues.  Labels are 1-based to match
rho; functions over Q_r (r < 6) take the dimension from ``len(z)``.
"""

from __future__ import annotations

from collections import Counter
from enum import IntEnum
from typing import Sequence

import numpy as np

from .torus import ModVec, RootFlatPoint, step_direction

PREFIX_DIM = 6


class Symbol(IntEnum):
    ZERO = 0
    DELTA = 1
    TWO = 2
    THREE = 3
    FOUR = 4
    FIVE = 5
    SIX = 6

    @classmethod
    def num(cls, a: int) -> "Symbol":
        if not 2 <= a <= 6:
            raise ValueError(f"numeric symbol must lie in 2..6, got {a}")
        return cls(a)

    def __str__(self) -> str:
        return {0: "0", 1: "D"}.get(int(self), str(int(self)))


def _require_dim7(w: ModVec) -> None:
    if w.n != 7:
        raise ValueError(f"prefix coordinates are defined for n = 7 only, got n = {w.n}")


def prefix_vector(r: int, dim: int = PREFIX_DIM) -> tuple[int, ...]:
    if not 0 <= r <= dim:
        raise ValueError(f"prefix length {r} outside [0, {dim}]")
    return tuple(1 if j < r else 0 for j in range(dim))


def phi(w: ModVec) -> tuple[int, ...]:
    _require_dim7(w)
    m = w.m
    out = []
    acc = 0
    for j in range(1, 7):
        acc += w[7 - j]
        out.append(acc % m)
    return tuple(out)


def phi_inv(z: Sequence[int], m: int) -> RootFlatPoint:
    if len(z) != PREFIX_DIM:
        raise ValueError(f"expected 6 prefix coordinates, got {len(z)}")
    z1 = (None,) + tuple(int(v) % m for v in z)  # 1-based view
    w = [0] * 7
    w[6] = z1[1]
    for i in range(1, 6):
        w[i] = z1[7 - i] - z1[6 - i]
    w[0] = -z1[6]
    return RootFlatPoint(tuple(w), m)


def _sub(z: Sequence[int], r: int, m: int) -> tuple[int, ...]:
    return tuple((v - 1) % m if j < r else v for j, v in enumerate(z))


def _add(z: Sequence[int], r: int, m: int) -> tuple[int, ...]:
    return tuple((v + 1) % m if j < r else v for j, v in enumerate(z))


def dictionary_step_check(w: RootFlatPoint, i: int) -> tuple[int, ...]:
    """Return phi(w + q_i) after confirming it equals phi(w) - p_{6-i}."""
    moved = phi(step_direction(w, i))
    expected = _sub(phi(w), 6 - i, w.m)
    if moved != expected:
        raise AssertionError(f"dictionary mismatch at w={w.entries}, i={i}: {moved} != {expected}")
    return moved


def rho(tau: int, z: Sequence[int], r: int | None = None) -> int:
    """1-based index of the first of z_1..z_r equal to tau, or r if there is none."""
    if r is None:
        r = len(z)
    if not 1 <= r <= len(z):
        raise ValueError(f"rho dimension {r} outside [1, {len(z)}]")
    for i in range(r):
        if z[i] == tau:
            return i + 1
    return r


def symbol_label(symbol: int, tau: int, z: Sequence[int]) -> int:
    """Prefix label used by ``symbol`` at z (threshold tau), in dimension len(z)."""
    dim = len(z)
    if symbol == Symbol.ZERO:
        return 0
    r = rho(tau, z)
    if symbol == Symbol.DELTA:
        return r
    a = int(symbol)
    if not 2 <= a <= dim:
        raise ValueError(f"symbol {a} is not available in dimension {dim}")
    return a if r < a else a - 1


def apply_symbol(symbol: int, tau: int, z: Sequence[int], m: int) -> tuple[tuple[int, ...], int]:
    """Apply M_tau^symbol to z.  Returns (image, label used)."""
    label = symbol_label(symbol, tau % m, z)
    return _sub(z, label, m), label


def invert_symbol(symbol: int, tau: int, y: Sequence[int], m: int) -> tuple[int, ...]:
    """Unique z with apply_symbol(symbol, tau, z, m)[0] == y."""
    tau %= m
    if symbol == Symbol.ZERO:
        return tuple(y)
    if symbol == Symbol.DELTA:
        return _add(y, rho((tau - 1) % m, y), m)
    a = int(symbol)
    if not 2 <= a <= len(y):
        raise ValueError(f"symbol {a} is not available in dimension {len(y)}")
    hit = any(v == (tau - 1) % m for v in y[: a - 1])
    return _add(y, a if hit else a - 1, m)


def layer_label_census(tau: int, z: Sequence[int], m: int) -> Counter:
    """Labels used by the seven symbols at z; always exactly {0, ..., 6} once each."""
    census = Counter(apply_symbol(s, tau, z, m)[1] for s in Symbol)
    if census != Counter(range(7)):
        raise AssertionError(f"labels at z={tuple(z)}, tau={tau} are {sorted(census.elements())}")
    return census


# -- vectorised forms ---------------------------------------------------------


def prefix_coords(w: np.ndarray, m: int) -> np.ndarray:
    """Row-wise phi for an (N, 7) array of root-flat points."""
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[1] != 7:
        raise ValueError(f"expected an (N, 7) array, got shape {w.shape}")
    acc = np.zeros(w.shape[0], dtype=np.int64)
    z = np.empty((w.shape[0], PREFIX_DIM), dtype=w.dtype)
    for j in range(1, 7):
        acc += w[:, 7 - j]
        acc %= m
        z[:, j - 1] = acc
    return z


def rho_array(tau: int, z: np.ndarray) -> np.ndarray:
    """Row-wise rho over an (N, r) array."""
    dim = z.shape[1]
    out = np.full(z.shape[0], dim, dtype=np.int64)
    for i in range(dim - 1, -1, -1):
        out[z[:, i] == tau] = i + 1
    return out


def labels_array(symbol: int, rho_values: np.ndarray, dim: int) -> np.ndarray:
    """Labels used by ``symbol`` given precomputed rho values."""
    if symbol == Symbol.ZERO:
        return np.zeros_like(rho_values)
    if symbol == Symbol.DELTA:
        return rho_values
    a = int(symbol)
    if not 2 <= a <= dim:
        raise ValueError(f"symbol {a} is not available in dimension {dim}")
    return np.where(rho_values < a, a, a - 1)


def subtract_prefix(z: np.ndarray, labels: np.ndarray, m: int) -> np.ndarray:
    """Row-wise z - p_label."""
    cols = np.arange(z.shape[1])
    mask = cols[None, :] < labels[:, None]
    return (z.astype(np.int64) - mask) % m


def invert_array(symbol: int, tau: int, y: np.ndarray, m: int) -> np.ndarray:
    """Row-wise ``invert_symbol`` over an (N, r) array."""
    dim = y.shape[1]
    tau %= m
    if symbol == Symbol.ZERO:
        return y.astype(np.int64) % m
    if symbol == Symbol.DELTA:
        labels = rho_array((tau - 1) % m, y)
    else:
        a = int(symbol)
        if not 2 <= a <= dim:
            raise ValueError(f"symbol {a} is not available in dimension {dim}")
        hit = (y[:, : a - 1] == (tau - 1) % m).any(axis=1)
        labels = np.where(hit, a, a - 1)
    return _add_prefix(y, labels, m)


def _add_prefix(y: np.ndarray, labels: np.ndarray, m: int) -> np.ndarray:
    cols = np.arange(y.shape[1])
    return (y.astype(np.int64) + (cols[None, :] < labels[:, None])) % m
