"""Finite certificate search for the boundary moduli m = 3 and 5.

Candidate tables are constant on the classes of a feature of the root-flat
state (by default its zero set, at most 121 classes).  The search runs in two
stages:

1. exact cover: for each layer, Algorithm X picks one direction per
   (class, color) so that each class row is a permutation of Z_7 and each
   color's layer map hits every state exactly once;
2. return-cycle search: simulated annealing over the m-layer stack, scored by
   the total number of surplus cycles of the seven return maps.  A move swaps
   the directions a, b of two colors on a union of classes that is invariant
   under translation by q_a - q_b.  Such a swap keeps both layer maps
   bijective and the rows Latin, so every candidate satisfies C1 and C2.

Any table reaching score 0 is expanded and re-checked with the certificate
checker before it is reported.
"""

from __future__ import annotations

import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .certificate import Certificate, CertificateReport, check_certificate, return_cycle_type
from .certificate_io import read_certificate
from .counts import NUM_COLORS, cyclic_schedule
from .errors import CertificateRejected
from .prefix import prefix_coords
from .torus import rootflat_coords, rootflat_size

log = logging.getLogger(__name__)

N = 7
BOUNDARY_MODULI = (3, 5)
CHECKPOINT_FORMAT = "rootflat-search-checkpoint"
SELECTOR_FORMAT = "rootflat-selector-table"
FORMAT_VERSION = 1

# annealing schedule: T = max(T_MIN, T0 * DECAY ** (counter // STEP)), restarting every PERIOD candidates
T0, DECAY, STEP, T_MIN, PERIOD = 2.0, 0.97, 2000, 0.05, 2_000_000


# -- features ------------------------------------------------------------------


def _zeroset(coords: np.ndarray, m: int) -> np.ndarray:
    return ((coords == 0) * (1 << np.arange(coords.shape[1]))).sum(axis=1)


def _prefix_zeroset(coords: np.ndarray, m: int) -> np.ndarray:
    return _zeroset(prefix_coords(coords, m), m)


def _zeroset_and_prefix(coords: np.ndarray, m: int) -> np.ndarray:
    return _zeroset(coords, m) | (_prefix_zeroset(coords, m) << N)


FEATURES = {
    "zeroset": _zeroset,
    "prefix-zeroset": _prefix_zeroset,
    "zeroset+prefix": _zeroset_and_prefix,
}


def _step_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """fwd[d][w] = index of w + q_d and back[d][w] = index of w - q_d."""
    size = rootflat_size(N, m)
    idx = np.arange(size, dtype=np.int64)
    fwd = np.empty((N, size), dtype=np.int64)
    back = np.empty((N, size), dtype=np.int64)
    for d in range(N):
        if d == N - 1:
            fwd[d] = idx
        else:
            pv = m ** (N - 2 - d)
            digit = (idx // pv) % m
            fwd[d] = np.where(digit == m - 1, idx - (m - 1) * pv, idx + pv)
        back[d][fwd[d]] = idx
    return fwd, back


@dataclass(eq=False)
class SelectorFamily:
    """Tables on A_{7,m} that are constant on the classes of a feature."""

    m: int
    feature: str
    cls: np.ndarray  # class id of every root-flat state
    keys: np.ndarray  # feature value of every class
    fwd: np.ndarray = field(repr=False)
    back: np.ndarray = field(repr=False)
    _regions: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, m: int, feature: str = "zeroset") -> "SelectorFamily":
        if feature not in FEATURES:
            raise ValueError(f"unknown feature {feature!r}; choose from {sorted(FEATURES)}")
        raw = FEATURES[feature](rootflat_coords(N, m), m)
        keys, class_of = np.unique(raw, return_inverse=True)
        fwd, back = _step_tables(m)
        return cls(m, feature, class_of.astype(np.int64), keys.astype(np.int64), fwd, back)

    @property
    def n_classes(self) -> int:
        return int(self.keys.size)

    @property
    def states(self) -> int:
        return int(self.cls.size)

    def expand(self, tables: np.ndarray, provenance: str = "") -> Certificate:
        tables = np.asarray(tables, dtype=np.uint8)
        if tables.shape != (self.m, self.n_classes, N):
            raise ValueError(f"selector tables have shape {tables.shape}, expected {(self.m, self.n_classes, N)}")
        return Certificate(N, self.m, tables[:, self.cls, :], provenance=provenance)

    def swap_regions(self, a: int, b: int) -> np.ndarray:
        """Component id per class for the closure under translation by q_a - q_b."""
        key = (min(a, b), max(a, b))
        if key not in self._regions:
            moved = self.back[b][self.fwd[a]]
            graph = coo_matrix(
                (np.ones(self.states), (self.cls, self.cls[moved])), shape=(self.n_classes, self.n_classes)
            )
            _, labels = connected_components(graph, directed=True, connection="weak")
            self._regions[key] = labels
        return self._regions[key]

    def layer_is_valid(self, layer: np.ndarray) -> bool:
        """Dense check of one layer: Latin rows and a bijective map for every color."""
        layer = np.asarray(layer)
        if not all(sorted(row) == list(range(N)) for row in layer.tolist()):
            return False
        states = np.arange(self.states)
        for k in range(N):
            image = self.fwd[layer[self.cls, k], states]
            if np.bincount(image, minlength=self.states).max() != 1:
                return False
        return True


# -- stage 1: exact cover ----------------------------------------------------------


class ExactCoverLayers:
    """Algorithm X over options (color, class, direction).

    Items: each (color, class) gets one direction, each (class, direction)
    is used by one color, and for each color every state is hit once.  State
    items with identical option sets are merged; that leaves the solution set
    unchanged and shrinks m = 5 from 15625 to about 2000 items per color.
    """

    def __init__(self, family: SelectorFamily):
        self.family = family
        f = family
        sig = np.stack([f.cls[f.back[d]] for d in range(N)], axis=1)
        _, sig_id = np.unique(sig, axis=0, return_inverse=True)
        sig_id = sig_id.reshape(-1)
        self.options: dict[tuple, list] = {}
        for c in range(f.n_classes):
            members = np.flatnonzero(f.cls == c)
            for d in range(N):
                hit = np.unique(sig_id[f.fwd[d][members]]).tolist()
                for k in range(N):
                    self.options[(k, c, d)] = [("kc", k, c), ("cd", c, d)] + [("ks", k, s) for s in hit]
        self.items: dict[tuple, set] = {}
        for opt, its in self.options.items():
            for it in its:
                self.items.setdefault(it, set()).add(opt)
        self.nodes = 0

    def _select(self, r):
        cols = []
        for j in self.options[r]:
            for i in self.items[j]:
                for k in self.options[i]:
                    if k != j:
                        self.items[k].discard(i)
            cols.append(self.items.pop(j))
        return cols

    def _deselect(self, r, cols):
        for j in reversed(self.options[r]):
            self.items[j] = cols.pop()
            for i in self.items[j]:
                for k in self.options[i]:
                    if k != j:
                        self.items[k].add(i)

    def _solve(self, rank, solution, limit) -> bool:
        self.nodes += 1
        if not self.items:
            return True
        if self.nodes > limit:
            return False
        col = min(self.items, key=lambda j: len(self.items[j]))
        for r in sorted(self.items[col], key=rank.__getitem__):
            cols = self._select(r)
            solution.append(r)
            found = self._solve(rank, solution, limit)
            self._deselect(r, cols)
            if found:
                return True
            solution.pop()
        return False

    def layer(self, rng: np.random.Generator, prefer=None, node_limit: int = 20_000) -> np.ndarray:
        """One random Latin, bijective, class-constant layer as a (classes, 7) table.

        With ``prefer`` (a permutation of Z_7), options where color k takes
        prefer[k] are tried first, so the search returns layers that are
        uniform on as many classes as possible.  Uniform layers leave the most
        room for swap moves in stage 2.
        """
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 4 * len(self.options)))
        try:
            while True:
                keys = list(self.options)
                noise = rng.permutation(len(keys))
                if prefer is not None:
                    noise = noise + len(keys) * np.array([d != prefer[k] for k, _, d in keys])
                rank = dict(zip(keys, noise.tolist()))
                self.nodes = 0
                solution: list = []
                if self._solve(rank, solution, node_limit):
                    break
                log.info("exact cover hit %d nodes; reshuffling", node_limit)
        finally:
            sys.setrecursionlimit(old)
        table = np.empty((self.family.n_classes, N), dtype=np.int64)
        for k, c, d in solution:
            table[c, k] = d
        return table


# -- stage 2 state -------------------------------------------------------------------


@dataclass
class SearchState:
    m: int
    seed: int
    feature: str = "zeroset"
    counter: int = 0
    elapsed: float = 0.0
    best_single: int = 0  # most colors with single-cycle returns seen at once
    best_surplus: int | None = None  # fewest surplus return cycles seen
    scores: list[int] = field(default_factory=list)
    tables: np.ndarray | None = None
    rng_state: dict | None = None
    found: bool = False

    def to_json(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": FORMAT_VERSION,
            "n": N,
            "m": self.m,
            "feature": self.feature,
            "seed": self.seed,
            "counter": self.counter,
            "elapsed_seconds": round(self.elapsed, 3),
            "best": {"single_cycle_colors": self.best_single, "surplus_cycles": self.best_surplus},
            "found": self.found,
            "scores": list(self.scores),
            "rng_state": self.rng_state,
            "tables": None if self.tables is None else self.tables.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SearchState":
        if data.get("format") != CHECKPOINT_FORMAT:
            raise ValueError("not a search checkpoint")
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {data.get('version')}")
        tables = data.get("tables")
        return cls(
            m=data["m"],
            seed=data["seed"],
            feature=data["feature"],
            counter=data["counter"],
            elapsed=data["elapsed_seconds"],
            best_single=data["best"]["single_cycle_colors"],
            best_surplus=data["best"]["surplus_cycles"],
            scores=list(data["scores"]),
            tables=None if tables is None else np.array(tables, dtype=np.int64),
            rng_state=data["rng_state"],
            found=data["found"],
        )

    def save(self, path) -> None:
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(self.to_json(), fh)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "SearchState":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class SearchResult:
    state: SearchState
    certificate: Certificate | None = None
    report: CertificateReport | None = None

    @property
    def found(self) -> bool:
        return self.certificate is not None


def temperature(counter: int) -> float:
    return max(T_MIN, T0 * DECAY ** ((counter % PERIOD) // STEP))


def _score(family: SelectorFamily, tables: np.ndarray, k: int) -> int:
    return int(_kernels.selector_return_cycles(tables, family.cls, k, N, family.m))


def search_boundary(
    m: int,
    budget: int | None = None,
    seed: int = 0,
    *,
    time_budget: float | None = None,
    feature: str = "zeroset",
    state: SearchState | None = None,
    family: SelectorFamily | None = None,
    paranoid: bool = False,
) -> SearchResult:
    """Search for a valid (7, m) certificate, m in {3, 5}.

    ``budget`` caps the number of stage-2 candidates evaluated in this call
    and ``time_budget`` the wall-clock seconds; either one running out returns
    a resumable state.  Pass a previous ``state`` to continue its stream.
    ``paranoid`` re-checks every accepted layer densely.
    """
    if m not in BOUNDARY_MODULI:
        raise ValueError(f"boundary search covers m in {BOUNDARY_MODULI}; use the prefix-count pipeline for m={m}")
    if state is None:
        state = SearchState(m=m, seed=seed, feature=feature)
    elif state.m != m:
        raise ValueError(f"checkpoint is for m={state.m}, not m={m}")
    if family is None:
        family = SelectorFamily.build(m, state.feature)
    if state.found:
        return SearchResult(state, *_finish(family, state))
    if budget is not None and budget <= 0 or time_budget is not None and time_budget <= 0:
        return SearchResult(state)

    started = time.monotonic()
    rng = np.random.default_rng(state.seed)
    if state.rng_state is not None:
        rng.bit_generator.state = state.rng_state

    if state.tables is None:
        stage1 = ExactCoverLayers(family)
        tables = np.stack([stage1.layer(rng, prefer=rng.permutation(N)) for _ in range(m)])
        for t in range(m):
            if not family.layer_is_valid(tables[t]):
                raise AssertionError(f"exact-cover layer {t} failed the dense check")
        state.tables = tables
        state.scores = [_score(family, tables, k) for k in range(N)]
        log.info("stage 1 done: %d layers in %.1fs", m, time.monotonic() - started)

    tables = state.tables
    scores = state.scores
    current = sum(scores) - N
    _update_best(state, scores)
    n_classes = family.n_classes
    done = 0
    while current > 0:
        if budget is not None and done >= budget:
            break
        if time_budget is not None and done % 256 == 0 and time.monotonic() - started >= time_budget:
            break
        temp = temperature(state.counter)
        state.counter += 1
        done += 1
        if state.counter % 100_000 == 0:
            log.info("candidate %d: surplus %d, scores %s, T=%.3f", state.counter, current, scores, temp)
        t = int(rng.integers(m))
        k1 = int(rng.integers(N))
        k2 = (k1 + 1 + int(rng.integers(N - 1))) % N
        c0 = int(rng.integers(n_classes))
        a, b = int(tables[t, c0, k1]), int(tables[t, c0, k2])
        regions = family.swap_regions(a, b)
        region = np.flatnonzero(regions == regions[c0])
        if not ((tables[t, region, k1] == a).all() and (tables[t, region, k2] == b).all()):
            continue
        tables[t, region, k1] = b
        tables[t, region, k2] = a
        if paranoid and not family.layer_is_valid(tables[t]):
            raise AssertionError(f"swap produced an invalid layer at t={t}")
        s1, s2 = _score(family, tables, k1), _score(family, tables, k2)
        proposed = current + (s1 - scores[k1]) + (s2 - scores[k2])
        if proposed <= current or rng.random() < math.exp((current - proposed) / temp):
            scores[k1], scores[k2] = s1, s2
            current = proposed
            _update_best(state, scores)
        else:
            tables[t, region, k1] = a
            tables[t, region, k2] = b

    state.rng_state = rng.bit_generator.state
    state.elapsed += time.monotonic() - started
    if current == 0:
        state.found = True
        return SearchResult(state, *_finish(family, state))
    return SearchResult(state)


def _update_best(state: SearchState, scores: list[int]) -> None:
    single = sum(1 for s in scores if s == 1)
    surplus = sum(scores) - N
    state.best_single = max(state.best_single, single)
    if state.best_surplus is None or surplus < state.best_surplus:
        state.best_surplus = surplus


def _finish(family: SelectorFamily, state: SearchState) -> tuple[Certificate, CertificateReport]:
    cert = family.expand(
        state.tables, provenance=f"search m={state.m} seed={state.seed} feature={state.feature} after {state.counter}"
    )
    report = check_certificate(cert)
    if not report.passed:
        raise AssertionError(f"search produced a table failing {report.first_failure}")
    return cert, report


# -- selector table files ------------------------------------------------------------


def save_selector_tables(state: SearchState, family: SelectorFamily, path) -> None:
    data = {
        "format": SELECTOR_FORMAT,
        "version": FORMAT_VERSION,
        "n": N,
        "m": state.m,
        "feature": family.feature,
        "class_keys": family.keys.tolist(),
        "seed": state.seed,
        "candidates": state.counter,
        "tables": np.asarray(state.tables).tolist(),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, separators=(",", ":"))
        fh.write("\n")


def load_selector_tables(source) -> Certificate:
    """Expand a selector-table JSON document (path, file object, or parsed dict) into a certificate."""
    if isinstance(source, dict):
        data = source
    elif isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = json.load(source)
    if data.get("format") != SELECTOR_FORMAT or data.get("version") != FORMAT_VERSION:
        raise ValueError("not a selector-table document")
    family = SelectorFamily.build(data["m"], data["feature"])
    if family.keys.tolist() != data["class_keys"]:
        raise ValueError("class keys in the file do not match the feature")
    return family.expand(
        np.array(data["tables"]), provenance=f"selector tables m={data['m']} seed={data.get('seed')}"
    )


def cached_boundary_certificate(m: int) -> Certificate | None:
    """Certificate shipped with the package for m in {3, 5}, or None."""
    res = resources.files("rootflat") / "data" / f"boundary_m{m}.json"
    if not res.is_file():
        return None
    with res.open() as fh:
        cert = load_selector_tables(json.load(fh))
    return Certificate(cert.n, cert.m, cert.table, provenance=f"cached boundary certificate m={m}")


def import_external_certificate(path) -> tuple[Certificate, CertificateReport]:
    """Read a certificate file and run the full checker; raises CertificateRejected on failure."""
    cert = read_certificate(path)
    report = check_certificate(cert)
    if not report.passed:
        lengths = report.c3.cycle_lengths if report.c3 is not None else []
        raise CertificateRejected(
            f"{os.fspath(path)} fails {report.first_failure}"
            + (f"; return orbit lengths {lengths}" if lengths else ""),
            report,
        )
    cert = Certificate(cert.n, cert.m, cert.table, provenance=f"imported from {os.fspath(path)}")
    return cert, report


# -- the prefix-count obstruction ------------------------------------------------------


@dataclass
class ObstructionReport:
    m: int
    zeros_available: int
    zeros_required: int
    zero_counts: list[int]  # N_0 per color in the exhibited schedule
    projection_shift: list[int]  # first-coordinate translation m - N_0 (mod m) per color
    return_cycle_types: list[list[int]]
    non_primitive_colors: list[int]

    def lines(self) -> list[str]:
        out = [
            f"obstruction.m={self.m}",
            f"obstruction.zeros_available={self.zeros_available}",
            f"obstruction.zeros_required={self.zeros_required}",
            f"obstruction.holds={'yes' if self.zeros_available < self.zeros_required else 'no'}",
        ]
        for k in range(NUM_COLORS):
            types = self.return_cycle_types[k]
            out.append(
                f"schedule.color.{k}.n0={self.zero_counts[k]} shift={self.projection_shift[k]} "
                f"cycles={len(types)} longest={max(types)}"
            )
        out.append("schedule.non_primitive_colors=" + ",".join(map(str, self.non_primitive_colors)))
        return out

    def explain(self) -> str:
        return (
            f"m={self.m}: in a prefix-count schedule the first prefix coordinate of a color's return map "
            f"moves by -(m - N_0), so a single cycle needs gcd(N_0, m) = 1 and in particular N_0 >= 1 for "
            f"each of the 7 colors. Every layer hands the 0-symbol to exactly one color, so only "
            f"{self.zeros_available} zero-symbols exist in total: fewer than {self.zeros_required}."
        )


def obstruction_witness(m: int) -> ObstructionReport:
    """Instantiate the counting argument for m in {3, 5} and exhibit a failing schedule."""
    if m >= 7:
        raise ValueError(f"m={m} is in range of the prefix-count construction; no obstruction")
    if m not in BOUNDARY_MODULI:
        raise ValueError(f"obstruction witness is defined for m in {BOUNDARY_MODULI}")
    from .certificate import certificate_from_schedule

    schedule = cyclic_schedule(m)
    zeros = [schedule.color_counts(k)[0] for k in range(NUM_COLORS)]
    cert = certificate_from_schedule(schedule)
    types = [return_cycle_type(cert, k) for k in range(NUM_COLORS)]
    bad = [k for k, ty in enumerate(types) if len(ty) > 1]
    return ObstructionReport(
        m=m,
        zeros_available=sum(zeros),
        zeros_required=NUM_COLORS,
        zero_counts=zeros,
        projection_shift=[(m - z) % m for z in zeros],
        return_cycle_types=types,
        non_primitive_colors=bad,
    )
