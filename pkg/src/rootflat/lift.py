"""Lift a certificate to an arc coloring of D_n(m) and verify it on the torus itself.

Color k leaves vertex x along e_d with d = d_{sigma(x)}(iota_{sigma(x)}(x), k).
Verification walks each color from vertex 0 with a visited bitmap and needs
to return after exactly m^n steps; it also checks that the n colors leave
every vertex along n distinct directions.  Vertices are indexed by all n
coordinates in base m (x_0 most significant), independent of root-flat
indexing.

Small tori materialize the (vertex, color) table; beyond ``DENSE_CUTOFF``
the coloring reads directions from the certificate per visited vertex.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .certificate import Certificate, check_certificate, check_layer_bijective, return_cycle_type
from .torus import ModVec, iota, sigma, vertex_from_index

log = logging.getLogger(__name__)

DENSE_CUTOFF = 9**7 * 7  # bytes of (vertex, color) table we are willing to materialize


@dataclass(frozen=True, eq=False)
class ArcColoring:
    n: int
    m: int
    table: np.ndarray | None = None  # (m^n, n) directions, dense mode
    certificate: Certificate | None = field(default=None, repr=False)  # lazy mode

    @property
    def vertices(self) -> int:
        return self.m**self.n

    @property
    def dense(self) -> bool:
        return self.table is not None

    def direction(self, x: int, color: int) -> int:
        if self.table is not None:
            return int(self.table[x, color])
        vx = ModVec(vertex_from_index(x, self.n, self.m), self.m)
        t = sigma(vx)
        return self.certificate.direction(t, iota(t, vx).index, color)

    def directions_at(self, x: int) -> list[int]:
        return [self.direction(x, k) for k in range(self.n)]


def lift_certificate(
    c: Certificate,
    *,
    dense: bool | None = None,
    unchecked: bool = False,
    report=None,
) -> ArcColoring:
    """Arc coloring of D_n(m) induced by ``c``.

    The certificate must pass C1-C3 unless ``unchecked`` is set (used to lift
    deliberately broken tables); pass an existing ``report`` to skip re-checking.
    """
    if not unchecked:
        report = report or check_certificate(c)
        if not report.passed:
            raise ValueError(f"certificate fails {report.first_failure}; pass unchecked=True to lift anyway")
    if dense is None:
        dense = c.m**c.n * c.n <= DENSE_CUTOFF
    if dense:
        return ArcColoring(c.n, c.m, _kernels.lift_table(c.table, c.n, c.m))
    return ArcColoring(c.n, c.m, None, c)


@dataclass
class CycleReport:
    n: int
    m: int
    cycle_lengths: list[int]
    covered: list[bool]
    partition_ok: bool
    bad_vertex: tuple[int, ...] | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        target = self.m**self.n
        return self.partition_ok and all(self.covered) and all(ln == target for ln in self.cycle_lengths)

    def lines(self) -> list[str]:
        out = [f"lift.partition={'pass' if self.partition_ok else 'fail'}"]
        if self.bad_vertex is not None:
            out.append("lift.partition.vertex=" + ",".join(map(str, self.bad_vertex)))
        for k, (ln, cov) in enumerate(zip(self.cycle_lengths, self.covered)):
            out.append(f"lift.color.{k}.cycle_len={ln}")
            out.append(f"lift.color.{k}.hamilton={'pass' if cov else 'fail'}")
        out.append(f"lift.result={'pass' if self.passed else 'fail'}")
        return out


def _walk(a: ArcColoring, color: int):
    if a.dense:
        return _kernels.walk_dense(a.table, color, a.n, a.m)
    return _kernels.walk_lazy(a.certificate.table, color, a.n, a.m)


def verify_decomposition(a: ArcColoring, threads: int = 1) -> CycleReport:
    """Check the arc partition at every vertex and walk every color class from vertex 0."""
    if a.dense:
        bad = _kernels.first_nonpartition_vertex(a.table, a.n)
    else:
        bad = _kernels.first_nonpartition_vertex_lazy(a.certificate.table, a.n, a.m)
    bad_vertex = vertex_from_index(int(bad), a.n, a.m) if bad >= 0 else None
    failures = []
    if bad_vertex is not None:
        failures.append(f"vertex {bad_vertex} repeats a direction: {a.directions_at(int(bad))}")

    def run(color: int):
        return _walk(a, color)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            walks = list(pool.map(run, range(a.n)))
    else:
        walks = [run(k) for k in range(a.n)]
    lengths, covered = [], []
    for k, (length, stuck, closed) in enumerate(walks):
        ok = bool(closed) and length == a.vertices
        lengths.append(int(length))
        covered.append(ok)
        if not closed:
            failures.append(f"color {k} revisits vertex {vertex_from_index(int(stuck), a.n, a.m)} before returning")
        elif not ok:
            failures.append(f"color {k} closes after {length} of {a.vertices} vertices")
    for msg in failures:
        log.debug(msg)
    return CycleReport(a.n, a.m, lengths, covered, bad_vertex is None, bad_vertex, failures)


def cayley_cycle_type(a: ArcColoring, color: int) -> list[int]:
    """Sorted cycle lengths of one color class (requires every vertex to have in-degree one)."""
    if not a.dense:
        raise ValueError("full cycle decomposition needs a dense arc coloring")
    succ = _kernels.color_successors(a.table, color, a.n, a.m)
    i, j = _kernels.first_duplicate(succ)
    if i >= 0:
        raise ValueError(f"color {color} is not a 1-factor: vertices {i} and {j} share a successor")
    return sorted(_kernels.cycle_lengths(succ).tolist())


def return_structure_crosscheck(c: Certificate, a: ArcColoring) -> bool:
    """Each color's torus cycle lengths are exactly m times its return-map cycle lengths."""
    rf2 = check_layer_bijective(c)
    if not rf2.passed:
        raise ValueError(f"cross-check needs bijective layers: {rf2.detail}")
    for k in range(c.n):
        expected = sorted(c.m * ln for ln in return_cycle_type(c, k))
        if cayley_cycle_type(a, k) != expected:
            return False
    return True


# -- cycle export --------------------------------------------------------------


def color_directions(a: ArcColoring, color: int) -> np.ndarray:
    """The m^n directions taken by ``color`` walking from vertex 0."""
    if a.dense:
        dirs, end = _kernels.record_dense(a.table, color, a.n, a.m)
    else:
        dirs, end = _kernels.record_lazy(a.certificate.table, color, a.n, a.m)
    if end != 0:
        raise ValueError(f"color {color} does not close after {a.vertices} steps")
    return dirs


def _vertex_chunks(dirs: np.ndarray, n: int, m: int, chunk: int = 1 << 20):
    """Yield (k, n) blocks of consecutive vertices visited by the direction sequence, starting at 0."""
    current = np.zeros(n, dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    for start in range(0, dirs.size, chunk):
        block = dirs[start : start + chunk]
        steps = eye[block]
        # vertex before step i of the block
        prior = np.vstack([np.zeros((1, n), dtype=np.int64), np.cumsum(steps, axis=0)[:-1]])
        yield (prior + current) % m
        current = (current + steps.sum(axis=0)) % m


def export_cycles(a: ArcColoring, color: int, sink, compact: bool = False, header: bool = True) -> None:
    """Write color's Hamilton cycle from vertex 0.

    Default: a ``cycle n= m= color= len=`` header (omitted with
    ``header=False``), then one vertex per line.  Compact: the header and then one line
    of direction digits.
    """
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w") as fh:
            export_cycles(a, color, fh, compact, header)
        return
    length, _, closed = _walk(a, color)
    if not closed or length != a.vertices:
        raise ValueError(f"color {color} is not a Hamilton cycle; refusing to export")
    dirs = color_directions(a, color)
    head = f"cycle n={a.n} m={a.m} color={color} len={a.vertices}"
    if compact:
        if a.n > 10:
            raise ValueError("compact form needs n <= 10")
        sink.write(head + " form=directions\n")
        sink.write((dirs + ord("0")).tobytes().decode() + "\n")
        return
    if header:
        sink.write(head + "\n")
    for block in _vertex_chunks(dirs, a.n, a.m):
        sink.write("\n".join(" ".join(map(str, row)) for row in block.tolist()) + "\n")


def read_cycle_file(path) -> tuple[dict, list[tuple[int, ...]] | str]:
    """Parse an exported cycle; returns (header fields, vertex list or direction string).

    Headerless vertex files get n and len from the data; m is unknown (None).
    """
    with open(path) as fh:
        first = fh.readline()
        tokens = first.split()
        if tokens and tokens[0] == "cycle":
            header = dict(tok.split("=", 1) for tok in tokens[1:])
            for key in ("n", "m", "color", "len"):
                header[key] = int(header[key])
            if header.get("form") == "directions":
                return header, fh.readline().strip()
            lines = fh
        else:
            header = None
            lines = [first, *fh]
        vertices = [tuple(int(v) for v in line.split()) for line in lines if line.strip()]
    if header is None:
        header = {"n": len(vertices[0]) if vertices else 0, "m": None, "color": None, "len": len(vertices)}
    if len(vertices) != header["len"]:
        raise ValueError(f"{path}: header says {header['len']} vertices, found {len(vertices)}")
    return header, vertices


def directions_from_vertices(vertices: list[tuple[int, ...]], m: int) -> str:
    """Recover the direction string from a closed vertex sequence; every arc must be some +e_i."""
    out = []
    for i, x in enumerate(vertices):
        y = vertices[(i + 1) % len(vertices)]
        diff = [(b - a) % m for a, b in zip(x, y)]
        moved = [j for j, v in enumerate(diff) if v]
        if len(moved) != 1 or diff[moved[0]] != 1:
            raise ValueError(f"step {i}: {x} -> {y} is not an arc of the torus")
        out.append(str(moved[0]))
    return "".join(out)
