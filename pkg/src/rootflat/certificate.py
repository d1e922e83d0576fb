"""Root-flat certificates and their three validity checks.

A certificate for D_n(m) stores, for every layer t, root-flat state w and
color k, the direction d_t(w, k) that color k takes.  It is valid when

* C1: at every (t, w) the n colors use n distinct directions;
* C2: every layer map P_{t,k}(w) = w + q_{d_t(w,k)} is a permutation;
* C3: every return map R_k = P_{m-1,k} ... P_{0,k} is one cycle of length m^(n-1).

Tables are dense uint8 arrays of shape (m, m^(n-1), n).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .counts import Schedule
from .prefix import apply_symbol, labels_array, phi, prefix_coords, rho_array
from .torus import RootFlatPoint, rootflat_coords, rootflat_size, step_direction

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Certificate:
    n: int
    m: int
    table: np.ndarray
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise ValueError(f"need n >= 2 and m >= 2, got n={self.n}, m={self.m}")
        shape = (self.m, rootflat_size(self.n, self.m), self.n)
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        if table.shape != shape:
            raise ValueError(f"table shape {table.shape} != expected {shape}")
        if table.size and int(table.max()) >= self.n:
            t, w, k = np.argwhere(table >= self.n)[0]
            raise ValueError(f"direction {table[t, w, k]} at (t={t}, w={w}, color={k}) is not < n={self.n}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def states(self) -> int:
        return rootflat_size(self.n, self.m)

    def direction(self, t: int, w: int, color: int) -> int:
        return int(self.table[t % self.m, w, color])

    def __eq__(self, other):
        if not isinstance(other, Certificate):
            return NotImplemented
        return self.n == other.n and self.m == other.m and np.array_equal(self.table, other.table)

    __hash__ = None


@dataclass
class CheckReport:
    name: str
    passed: bool
    detail: str = ""
    locus: dict = field(default_factory=dict)
    cycle_lengths: list[int] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"check.{self.name.lower()}={'pass' if self.passed else 'fail'}"]
        if self.locus:
            out += [f"check.{self.name.lower()}.{k}={v}" for k, v in self.locus.items()]
        return out


def check_row_latin(c: Certificate) -> CheckReport:
    t, w, k = _kernels.first_nonlatin_row(c.table)
    if t < 0:
        return CheckReport("C1", True, f"all {c.m * c.states} rows are permutations of Z_{c.n}")
    row = c.table[t, w].tolist()
    point = RootFlatPoint.from_index(int(w), c.n, c.m).entries
    return CheckReport(
        "C1",
        False,
        f"layer {t}, state {w} {point}: directions {row} are not a permutation (color {k} repeats)",
        {"t": int(t), "w": int(w), "color": int(k)},
    )


def check_layer_bijective(c: Certificate) -> CheckReport:
    for t in range(c.m):
        for k in range(c.n):
            image = _kernels.layer_image(c.table, t, k, c.n, c.m)
            i, j = _kernels.first_duplicate(image)
            if i >= 0:
                return CheckReport(
                    "C2",
                    False,
                    f"P(t={t}, color={k}) sends states {i} and {j} to {image[i]}",
                    {"t": t, "color": k, "w": int(i), "w2": int(j)},
                )
    return CheckReport("C2", True, f"all {c.m * c.n} layer maps are permutations")


def return_map(c: Certificate, color: int) -> np.ndarray:
    return _kernels.return_map(c.table, color, c.n, c.m)


def rotated_return_map(c: Certificate, color: int, start: int) -> np.ndarray:
    return _kernels.rotated_return_map(c.table, color, start % c.m, c.n, c.m)


def check_primitive_return(c: Certificate, layers_checked: bool = False, threads: int = 1) -> CheckReport:
    """Orbit length of state 0 under every R_k; passes iff each equals m^(n-1)."""
    if not layers_checked:
        c2 = check_layer_bijective(c)
        if not c2.passed:
            raise ValueError(f"refusing C3: layer maps are not bijective ({c2.detail})")

    def orbit(k: int) -> int:
        return int(_kernels.orbit_length(return_map(c, k), 0))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            lengths = list(pool.map(orbit, range(c.n)))
    else:
        lengths = [orbit(k) for k in range(c.n)]
    bad = [k for k, ln in enumerate(lengths) if ln != c.states]
    if bad:
        return CheckReport(
            "C3",
            False,
            f"colors {bad} have short return orbits {[lengths[k] for k in bad]} (need {c.states})",
            {"color": bad[0]},
            lengths,
        )
    return CheckReport("C3", True, f"all {c.n} return maps are single {c.states}-cycles", {}, lengths)


def return_cycle_type(c: Certificate, color: int) -> list[int]:
    return sorted(_kernels.cycle_lengths(return_map(c, color)).tolist())


@dataclass
class CertificateReport:
    c1: CheckReport
    c2: CheckReport | None
    c3: CheckReport | None

    @property
    def passed(self) -> bool:
        return all(r is not None and r.passed for r in (self.c1, self.c2, self.c3))

    @property
    def first_failure(self) -> str | None:
        for r in (self.c1, self.c2, self.c3):
            if r is None or not r.passed:
                return r.name if r is not None else None
        return None

    def lines(self) -> list[str]:
        out = []
        for name, r in (("c1", self.c1), ("c2", self.c2), ("c3", self.c3)):
            out += r.lines() if r is not None else [f"check.{name}=skipped"]
        if self.c3 is not None:
            out += [f"color.{k}.cycle_len={ln}" for k, ln in enumerate(self.c3.cycle_lengths)]
        return out


def check_certificate(c: Certificate, threads: int = 1) -> CertificateReport:
    """Run C1, C2, C3 in order.  C3 is skipped when C2 fails; C2 still runs after a C1 failure."""
    c1 = check_row_latin(c)
    c2 = check_layer_bijective(c)
    c3 = check_primitive_return(c, layers_checked=True, threads=threads) if c2.passed else None
    return CertificateReport(c1, c2, c3)


# -- construction from a prefix-count schedule --------------------------------


def certificate_from_schedule(schedule: Schedule, sample: int = 64, seed: int = 0) -> Certificate:
    """d_t(w, k) = 6 - (label used by symbol mu_t(k) at phi(w), threshold tau_t)."""
    m = schedule.m
    coords = rootflat_coords(7, m)
    z = prefix_coords(coords, m)
    table = np.empty((m, coords.shape[0], 7), dtype=np.uint8)
    for t in range(m):
        rho_t = rho_array(schedule.thresholds[t], z)
        for k in range(7):
            labels = labels_array(schedule.symbols[t][k], rho_t, 6)
            table[t, :, k] = 6 - labels
        del rho_t
    del z, coords
    cert = Certificate(7, m, table, provenance=f"prefix-count schedule, m={m}")
    _spot_check_commuting(cert, schedule, sample, seed)
    return cert


def _spot_check_commuting(cert: Certificate, schedule: Schedule, sample: int, seed: int) -> None:
    """phi(w + q_d) must equal M(phi(w)) on a random sample of (t, w, k)."""
    rng = np.random.default_rng(seed)
    for _ in range(sample):
        t = int(rng.integers(cert.m))
        w_idx = int(rng.integers(cert.states))
        k = int(rng.integers(7))
        w = RootFlatPoint.from_index(w_idx, 7, cert.m)
        d = cert.direction(t, w_idx, k)
        image, label = apply_symbol(schedule.symbols[t][k], schedule.thresholds[t], phi(w), cert.m)
        if phi(step_direction(w, d)) != image or d != 6 - label:
            raise AssertionError(f"schedule lift disagrees with the prefix map at t={t}, w={w.entries}, color={k}")


def constant_certificate(n: int, m: int, directions) -> Certificate:
    """Certificate where color k takes directions[t][k] at every state of layer t."""
    dirs = np.asarray(directions, dtype=np.uint8)
    if dirs.shape == (n,):
        dirs = np.tile(dirs, (m, 1))
    table = np.broadcast_to(dirs[:, None, :], (m, rootflat_size(n, m), n))
    return Certificate(n, m, table.copy(), provenance="constant layers")
