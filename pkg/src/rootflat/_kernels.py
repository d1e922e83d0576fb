"""Compiled inner loops.

Root-flat states are indexed by n-1 base-m digits and torus vertices by n
digits, most significant first.  A root-flat step q_d (d < n-1) increments
digit d, a torus step e_d increments digit d; both wrap mod m.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def bump_digit(idx, d, ndigits, m):
    pv = 1
    for _ in range(ndigits - 1 - d):
        pv *= m
    if (idx // pv) % m == m - 1:
        return idx - (m - 1) * pv
    return idx + pv


@njit(cache=True, nogil=True)
def rootflat_step(idx, d, n, m):
    if d == n - 1:
        return idx
    return bump_digit(idx, d, n - 1, m)


@njit(cache=True, nogil=True)
def first_duplicate(p):
    """Return (i, j) with i < j and p[i] == p[j], or (-1, -1) if p is injective into range(len(p))."""
    size = p.shape[0]
    owner = np.full(size, -1, dtype=np.int64)
    for i in range(size):
        v = p[i]
        if v < 0 or v >= size:
            return i, i
        if owner[v] >= 0:
            return owner[v], i
        owner[v] = i
    return -1, -1


@njit(cache=True, nogil=True)
def orbit_length(p, start):
    x = p[start]
    length = 1
    while x != start:
        x = p[x]
        length += 1
    return length


@njit(cache=True, nogil=True)
def cycle_lengths(p):
    size = p.shape[0]
    seen = np.zeros(size, dtype=np.bool_)
    out = []
    for s in range(size):
        if seen[s]:
            continue
        length = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        out.append(length)
    return np.array(out, dtype=np.int64)


@njit(cache=True, nogil=True)
def first_nonlatin_row(table):
    """Scan (t, w) in canonical order; return the first row that is not a permutation of range(n)."""
    layers, size, n = table.shape
    for t in range(layers):
        for w in range(size):
            mask = 0
            for k in range(n):
                d = table[t, w, k]
                if d >= n or (mask >> d) & 1:
                    return t, w, k
                mask |= 1 << d
    return -1, -1, -1


@njit(cache=True, nogil=True)
def layer_image(table, t, k, n, m):
    size = table.shape[1]
    out = np.empty(size, dtype=np.int64)
    for w in range(size):
        out[w] = rootflat_step(w, table[t, w, k], n, m)
    return out


@njit(cache=True, nogil=True)
def return_map(table, k, n, m):
    """R_k = P_{m-1,k} ... P_{0,k} as a dense array."""
    layers, size, _ = table.shape
    out = np.empty(size, dtype=np.int64)
    for w in range(size):
        x = w
        for t in range(layers):
            x = rootflat_step(x, table[t, x, k], n, m)
        out[w] = x
    return out


@njit(cache=True, nogil=True)
def rotated_return_map(table, k, start, n, m):
    """P_{start-1,k} ... P_{start,k}: the return map read from layer ``start``."""
    layers, size, _ = table.shape
    out = np.empty(size, dtype=np.int64)
    for w in range(size):
        x = w
        for s in range(layers):
            t = (start + s) % layers
            x = rootflat_step(x, table[t, x, k], n, m)
        out[w] = x
    return out


@njit(cache=True, nogil=True)
def selector_return_cycles(tables, cls, k, n, m):
    """Number of cycles of the return map of color k for a class-constant table."""
    layers = tables.shape[0]
    size = cls.shape[0]
    image = np.empty(size, dtype=np.int64)
    for w in range(size):
        x = w
        for t in range(layers):
            x = rootflat_step(x, tables[t, cls[x], k], n, m)
        image[w] = x
    seen = np.zeros(size, dtype=np.bool_)
    count = 0
    for s in range(size):
        if seen[s]:
            continue
        count += 1
        x = s
        while not seen[x]:
            seen[x] = True
            x = image[x]
    return count


# -- torus side --------------------------------------------------------------


@njit(cache=True, nogil=True)
def _layer_and_root_index(x, n, m):
    """Layer sigma(x) and the root-flat index of x - sigma(x) e_{n-1}."""
    s = 0
    y = x
    for _ in range(n):
        s += y % m
        y //= m
    # dropping the last digit leaves x_0..x_{n-2}, which iota does not touch
    return s % m, x // m


@njit(cache=True, nogil=True)
def lift_table(table, n, m):
    size = 1
    for _ in range(n):
        size *= m
    out = np.empty((size, n), dtype=table.dtype)
    for x in range(size):
        t, w = _layer_and_root_index(x, n, m)
        for k in range(n):
            out[x, k] = table[t, w, k]
    return out


@njit(cache=True, nogil=True)
def first_nonpartition_vertex(arcs, n):
    size = arcs.shape[0]
    for x in range(size):
        mask = 0
        for k in range(n):
            d = arcs[x, k]
            if d >= n or (mask >> d) & 1:
                return x
            mask |= 1 << d
    return -1


@njit(cache=True, nogil=True)
def first_nonpartition_vertex_lazy(table, n, m):
    size = 1
    for _ in range(n):
        size *= m
    for x in range(size):
        t, w = _layer_and_root_index(x, n, m)
        mask = 0
        for k in range(n):
            d = table[t, w, k]
            if d >= n or (mask >> d) & 1:
                return x
            mask |= 1 << d
    return -1


@njit(cache=True, nogil=True)
def _walk(arcs, table, lazy, k, n, m):
    size = 1
    for _ in range(n):
        size *= m
    visited = np.zeros(size, dtype=np.bool_)
    x = 0
    length = 0
    while True:
        visited[x] = True
        if lazy:
            t, w = _layer_and_root_index(x, n, m)
            d = table[t, w, k]
        else:
            d = arcs[x, k]
        if d >= n:
            return length, x, False
        x = bump_digit(x, d, n, m)
        length += 1
        if x == 0:
            return length, -1, True
        if visited[x]:
            # entered a cycle that avoids the start: some vertex has two predecessors
            return length, x, False


def walk_dense(arcs, k, n, m):
    return _walk(arcs, np.zeros((1, 1, 1), dtype=arcs.dtype), False, k, n, m)


def walk_lazy(table, k, n, m):
    return _walk(np.zeros((1, 1), dtype=table.dtype), table, True, k, n, m)


@njit(cache=True, nogil=True)
def color_successors(arcs, k, n, m):
    size = arcs.shape[0]
    out = np.empty(size, dtype=np.int64)
    for x in range(size):
        out[x] = bump_digit(x, arcs[x, k], n, m)
    return out


@njit(cache=True, nogil=True)
def _walk_record(arcs, table, lazy, k, n, m):
    size = 1
    for _ in range(n):
        size *= m
    out = np.empty(size, dtype=np.uint8)
    x = 0
    for i in range(size):
        if lazy:
            t, w = _layer_and_root_index(x, n, m)
            d = table[t, w, k]
        else:
            d = arcs[x, k]
        out[i] = d
        x = bump_digit(x, d, n, m)
    return out, x


def record_dense(arcs, k, n, m):
    return _walk_record(arcs, np.zeros((1, 1, 1), dtype=arcs.dtype), False, k, n, m)


def record_lazy(table, k, n, m):
    return _walk_record(np.zeros((1, 1), dtype=table.dtype), table, True, k, n, m)
