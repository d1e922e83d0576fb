"""Small generic certificate builder used to make valid non-7 test inputs."""

import math

import numpy as np

from rootflat.certificate import Certificate, check_certificate
from rootflat.counts import cycle_type
from rootflat.torus import rootflat_coords


def _step_index(n, m):
    coords = rootflat_coords(n, m).astype(np.int64)
    place = m ** np.arange(n - 2, -1, -1)
    out = np.empty((n, coords.shape[0]), dtype=np.int64)
    for d in range(n):
        moved = coords.copy()
        if d < n - 1:
            moved[:, d] = (moved[:, d] + 1) % m
        out[d] = moved[:, :-1] @ place
    return out


def anneal_certificate(n, m, seed=0, max_steps=200_000):
    """Anneal state-level swap moves from constant Latin layers until every return map is one cycle."""
    rng = np.random.default_rng(seed)
    fwd = _step_index(n, m)
    size = fwd.shape[1]
    table = np.empty((m, size, n), dtype=np.int64)
    for t in range(m):
        table[t] = rng.permutation(n)

    def cycles(k):
        x = np.arange(size)
        for t in range(m):
            x = fwd[table[t, x, k], x]
        return len(cycle_type(x))

    scores = [cycles(k) for k in range(n)]
    current = sum(scores) - n
    temp = 1.0
    for step in range(max_steps):
        if current == 0:
            break
        t = int(rng.integers(m))
        k1, k2 = (int(v) for v in rng.choice(n, 2, replace=False))
        w = int(rng.integers(size))
        a, b = table[t, w, k1], table[t, w, k2]
        # orbit of w under translation by q_a - q_b is swap-invariant
        orbit, x = [], w
        while True:
            orbit.append(x)
            x = _translate(fwd, a, b, x)
            if x == w:
                break
        orbit = np.array(orbit)
        if not ((table[t, orbit, k1] == a).all() and (table[t, orbit, k2] == b).all()):
            continue
        table[t, orbit, k1], table[t, orbit, k2] = b, a
        s1, s2 = cycles(k1), cycles(k2)
        new = current + s1 - scores[k1] + s2 - scores[k2]
        if new <= current or rng.random() < math.exp((current - new) / temp):
            scores[k1], scores[k2], current = s1, s2, new
        else:
            table[t, orbit, k1], table[t, orbit, k2] = a, b
        temp = max(0.05, temp * 0.999)
    cert = Certificate(n, m, table)
    assert check_certificate(cert).passed, "annealing did not converge"
    return cert


def _translate(fwd, a, b, x):
    # x + q_a - q_b: step by q_a, then undo a q_b step
    y = fwd[a][x]
    return int(np.flatnonzero(fwd[b] == y)[0])
