"""Command-line interface: ``rootflat <command> [options]``.

Exit codes: 0 ok, 1 error, 2 C1 failed, 3 C2 failed, 4 C3 failed, 5 lift
verification failed, 6 search budget exhausted (checkpoint written),
7 informational obstruction (matrix for m < 7), 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import time

from . import __version__
from .certificate import CertificateReport, certificate_from_schedule, check_certificate
from .certificate_io import read_certificate, write_certificate
from .counts import build_schedule, count_matrix_for, matching_decomposition
from .errors import BoundaryObstruction, CertificateFormatError, CertificateRejected
from .lift import DENSE_CUTOFF, export_cycles, lift_certificate, verify_decomposition

EXIT_OK, EXIT_ERROR, EXIT_C1, EXIT_C2, EXIT_C3, EXIT_LIFT, EXIT_BUDGET, EXIT_OBSTRUCTION = range(8)
EXIT_USAGE = 64
AUTO_LIFT_VERTICES = 13**7  # lift verification runs by default up to this many torus vertices

log = logging.getLogger("rootflat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- option parsing helpers ----------------------------------------------------


def parse_budget(text: str | None) -> tuple[int | None, float | None]:
    """'60s', '10m', '1h' give a time budget in seconds; a bare integer counts candidates."""
    if text is None:
        return None, None
    match = re.fullmatch(r"(\d+(?:\.\d+)?)([smh])", text.strip())
    if match:
        scale = {"s": 1, "m": 60, "h": 3600}[match.group(2)]
        return None, float(match.group(1)) * scale
    if text.strip().isdigit():
        return int(text), None
    raise UsageError(f"budget {text!r} is neither a candidate count nor a duration like 60s")


def parse_thresholds(text: str | None, m: int) -> list[int] | None:
    if text is None:
        return None
    try:
        values = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"thresholds {text!r} must be integers") from None
    if len(values) == 1:
        values *= m
    if len(values) != m:
        raise UsageError(f"need 1 or {m} thresholds, got {len(values)}")
    return [v % m for v in values]


def _require_odd(m: int, least: int = 3) -> None:
    if m % 2 == 0 or m < least:
        raise UsageError(f"m={m} is out of scope: decompositions are constructed for odd m >= {least}")


def _check_out_path(path) -> None:
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory {parent} does not exist")


def _check_in_path(path) -> None:
    if path is not None and not os.path.isfile(path):
        raise UsageError(f"input file {path} not found")


# -- reports -----------------------------------------------------------------------


class Report:
    """Ordered key=value lines, printed as text or as one JSON object."""

    def __init__(self):
        self.lines: list[str] = []

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key}={value}")

    def extend(self, lines) -> None:
        self.lines.extend(lines)

    def as_dict(self) -> dict:
        out = {}
        for line in self.lines:
            key, _, value = line.partition("=")
            out[key] = value
        return out

    def emit(self, args) -> None:
        text = json.dumps(self.as_dict(), indent=2) if args.json else "\n".join(self.lines)
        print(text)
        if getattr(args, "report", None):
            with open(args.report, "w") as fh:
                fh.write(text + "\n")


def _check_exit(report: CertificateReport) -> int:
    return {None: EXIT_OK, "C1": EXIT_C1, "C2": EXIT_C2, "C3": EXIT_C3}[report.first_failure]


def _estimate(m: int, n: int = 7) -> tuple[float, bool]:
    """(memory in MB, dense?) for lift verification."""
    vertices = m**n
    dense = vertices * n <= DENSE_CUTOFF
    table = m * m ** (n - 1) * n
    mb = (table + vertices * (n + 1 if dense else 1)) / 2**20
    return mb, dense


def _lift_and_report(cert, cert_report, report: Report, threads: int) -> int:
    mb, dense = _estimate(cert.m, cert.n)
    report.add("lift.mode", "dense" if dense else "streaming")
    report.add("lift.memory_mb", f"{mb:.0f}")
    start = time.monotonic()
    coloring = lift_certificate(cert, report=cert_report)
    cycles = verify_decomposition(coloring, threads=threads)
    report.extend(cycles.lines())
    log.info("lift verification took %.1fs", time.monotonic() - start)
    return EXIT_OK if cycles.passed else EXIT_LIFT


def _lift_enabled(args, cert) -> bool:
    return args.full_verify or cert.m**cert.n <= AUTO_LIFT_VERTICES


# -- commands ------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    m = args.m
    _require_odd(m)
    _check_out_path(args.out)
    _check_in_path(args.cert)
    if m**7 > AUTO_LIFT_VERTICES and not args.full_verify:
        mb, _ = _estimate(m)
        raise UsageError(
            f"m={m}: lift verification walks {m**7} vertices (~{mb:.0f} MB); "
            "decompose always verifies the lift, so pass --full-verify to confirm"
        )
    report = Report()
    report.add("n", 7)
    report.add("m", m)
    if m >= 7:
        schedule = build_schedule(m, parse_thresholds(args.thresholds, m))
        report.add("route", "prefix-count")
        report.add("matrix.family", schedule.matrix.family)
        report.add("thresholds", ",".join(map(str, schedule.thresholds)))
        cert = certificate_from_schedule(schedule)
    else:
        if args.thresholds is not None:
            raise UsageError("--thresholds applies to the prefix-count route (m >= 7)")
        cert, status = _boundary_certificate(args, report)
        if cert is None:
            report.emit(args)
            return status
    report.add("provenance", cert.provenance)
    cert_report = check_certificate(cert, threads=args.threads)
    report.extend(cert_report.lines())
    if args.out:
        write_certificate(cert, args.out)
        report.add("certificate", args.out)
    if not cert_report.passed:
        report.add("result", "fail")
        report.emit(args)
        return _check_exit(cert_report)
    status = _lift_and_report(cert, cert_report, report, args.threads)
    report.add("result", "pass" if status == EXIT_OK else "fail")
    report.emit(args)
    return status


def _boundary_certificate(args, report: Report):
    from .search import SearchState, cached_boundary_certificate, import_external_certificate, search_boundary

    m = args.m
    if args.cert:
        report.add("route", "imported")
        try:
            cert, _ = import_external_certificate(args.cert)
        except CertificateRejected as exc:
            report.extend(exc.report.lines())
            report.add("result", "fail")
            return None, _check_exit(exc.report)
        return cert, EXIT_OK
    if not args.search:
        cert = cached_boundary_certificate(m)
        if cert is not None:
            report.add("route", "cached")
            return cert, EXIT_OK
    report.add("route", "search")
    state = SearchState.load(args.resume) if args.resume else None
    count, seconds = parse_budget(args.budget or "600s")
    result = search_boundary(m, count, args.seed, time_budget=seconds, state=state)
    _search_lines(result.state, report)
    if result.found:
        return result.certificate, EXIT_OK
    path = args.checkpoint or f"search_m{m}_seed{result.state.seed}.json"
    result.state.save(path)
    report.add("search.checkpoint", path)
    report.add("result", "budget-exhausted")
    return None, EXIT_BUDGET


def _search_lines(state, report: Report) -> None:
    report.add("search.seed", state.seed)
    report.add("search.feature", state.feature)
    report.add("search.candidates", state.counter)
    report.add("search.best_single_cycle_colors", state.best_single)
    report.add("search.best_surplus_cycles", state.best_surplus)
    report.add("search.found", "yes" if state.found else "no")
    log.info("search has run %.1fs in total", state.elapsed)


def cmd_verify(args) -> int:
    path = args.cert or args.path
    if path is None:
        raise UsageError("verify needs a certificate file (--cert PATH)")
    _check_in_path(path)
    cert = read_certificate(path)
    report = Report()
    report.add("n", cert.n)
    report.add("m", cert.m)
    report.add("provenance", cert.provenance)
    cert_report = check_certificate(cert, threads=args.threads)
    report.extend(cert_report.lines())
    status = _check_exit(cert_report)
    if status == EXIT_OK:
        if _lift_enabled(args, cert):
            status = _lift_and_report(cert, cert_report, report, args.threads)
        else:
            mb, _ = _estimate(cert.m, cert.n)
            report.add("lift", f"skipped (needs --full-verify, ~{mb:.0f} MB)")
    report.add("result", "pass" if status == EXIT_OK else "fail")
    report.emit(args)
    return status


def cmd_matrix(args) -> int:
    m = args.m
    if m % 2 == 0 or m < 3:
        raise UsageError(f"m={m}: count matrices exist for odd m >= 7")
    try:
        matrix = count_matrix_for(m)
    except BoundaryObstruction:
        from .search import obstruction_witness

        witness = obstruction_witness(m)
        print(witness.explain())
        if not args.check_only:
            print("\n".join(witness.lines()))
        return EXIT_OBSTRUCTION
    passes = matrix.rows_pass_criterion()
    matchings = matching_decomposition(matrix)
    ok = all(passes) and len(matchings) == m
    if args.check_only:
        print(f"matrix.m={m} matrix.family={matrix.family} matrix.valid={'yes' if ok else 'no'}")
        return EXIT_OK if ok else EXIT_ERROR
    print(f"count matrix for m={m} ({matrix.family})")
    print(matrix.format())
    print()
    for k, good in enumerate(passes):
        print(f"row.{k}.criterion={'pass' if good else 'fail'}")
    print()
    for t, match in enumerate(matchings):
        print(f"matching {t}: " + " ".join(f"{k}->{str(s)}" for k, s in enumerate(_symbols(match))))
    return EXIT_OK if ok else EXIT_ERROR


def _symbols(match):
    from .prefix import Symbol

    return [Symbol(s) for s in match]


def cmd_search(args) -> int:
    from .search import BOUNDARY_MODULI, SearchState, search_boundary

    m = args.m
    if m not in BOUNDARY_MODULI:
        raise UsageError(f"m={m}: the constructive prefix-count route covers this case; use 'decompose --m {m}'")
    _check_out_path(args.out)
    _check_in_path(args.resume)
    state = SearchState.load(args.resume) if args.resume else None
    count, seconds = parse_budget(args.budget)
    result = search_boundary(m, count, args.seed, time_budget=seconds, feature=args.feature, state=state)
    report = Report()
    report.add("m", m)
    _search_lines(result.state, report)
    if not result.found:
        path = args.checkpoint or f"search_m{m}_seed{result.state.seed}.json"
        result.state.save(path)
        report.add("search.checkpoint", path)
        report.add("result", "budget-exhausted")
        report.emit(args)
        return EXIT_BUDGET
    out = args.out or f"rootflat_m{m}_seed{result.state.seed}.rfc"
    write_certificate(result.certificate, out)
    report.add("certificate", out)
    report.extend(result.report.lines())
    status = _lift_and_report(result.certificate, result.report, report, args.threads)
    report.add("result", "pass" if status == EXIT_OK else "fail")
    report.emit(args)
    return status


def cmd_export(args) -> int:
    if args.cert is None or args.out is None:
        raise UsageError("export needs --cert and --out")
    _check_in_path(args.cert)
    _check_out_path(args.out)
    cert = read_certificate(args.cert)
    if not 0 <= args.color < cert.n:
        raise UsageError(f"color must be in 0..{cert.n - 1}")
    cert_report = check_certificate(cert)
    if not cert_report.passed:
        print("\n".join(cert_report.lines()))
        return _check_exit(cert_report)
    coloring = lift_certificate(cert, report=cert_report)
    try:
        export_cycles(coloring, args.color, args.out, compact=args.compact, header=args.header)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIFT
    print(f"export.color={args.color}")
    print(f"export.length={cert.m**cert.n}")
    print(f"export.path={args.out}")
    return EXIT_OK


def cmd_info(args) -> int:
    from .search import BOUNDARY_MODULI, cached_boundary_certificate

    report = Report()
    report.add("version", __version__)
    report.add("lift.dense_cutoff_bytes", DENSE_CUTOFF)
    report.add("lift.auto_vertices", AUTO_LIFT_VERTICES)
    for m in BOUNDARY_MODULI:
        cert = cached_boundary_certificate(m)
        report.add(f"cached.m{m}", "yes" if cert is not None else "no")
    if args.m is not None:
        mb, dense = _estimate(args.m)
        report.add("m", args.m)
        report.add("vertices", args.m**7)
        report.add("route", "prefix-count" if args.m >= 7 else "boundary")
        if args.m >= 7 and args.m % 2:
            report.add("matrix.family", count_matrix_for(args.m).family)
        report.add("lift.mode", "dense" if dense else "streaming")
        report.add("lift.memory_mb", f"{mb:.0f}")
        report.add("lift.default", "on" if args.m**7 <= AUTO_LIFT_VERTICES else "needs --full-verify")
    report.emit(args)
    return EXIT_OK


# -- wiring ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads for per-color checks")
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--report", help="also write the report to this file")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="rootflat", description="Hamilton decompositions of the directed 7-torus D_7(m).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", parents=[common], help="build, check and lift a certificate for odd m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--thresholds", help="per-layer thresholds tau_t, comma separated (one value = all layers)")
    p.add_argument("--cert", help="use this certificate for m in {3, 5}")
    p.add_argument("--search", action="store_true", help="search even when a cached certificate exists")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", help="search budget: candidate count or duration (60s, 10m)")
    p.add_argument("--resume", help="continue a search checkpoint")
    p.add_argument("--checkpoint", help="where to write the checkpoint if the budget runs out")
    p.add_argument("--out", help="write the certificate here (.rfcb for binary)")
    p.add_argument("--full-verify", action="store_true", help="allow lift verification above m=13")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", parents=[common], help="check a certificate file")
    p.add_argument("path", nargs="?")
    p.add_argument("--cert")
    p.add_argument("--full-verify", action="store_true", help="run the lift verification for large tori")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("matrix", help="show the count matrix and its matchings")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--check-only", action="store_true")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("search", parents=[common], help="search for a boundary certificate (m = 3 or 5)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", help="candidate count or duration (60s, 10m); default unlimited")
    p.add_argument("--feature", default="zeroset", help="selector feature: zeroset, prefix-zeroset, zeroset+prefix")
    p.add_argument("--resume", help="continue from a checkpoint file")
    p.add_argument("--checkpoint", help="checkpoint path (default search_m<M>_seed<S>.json)")
    p.add_argument("--out", help="certificate path on success")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("export", help="write one color's Hamilton cycle")
    p.add_argument("--cert", required=True)
    p.add_argument("--color", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--compact", action="store_true", help="one line of directions instead of vertices")
    p.add_argument("--no-header", dest="header", action="store_false", help="omit the 'cycle ...' header line")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("info", parents=[common], help="version, cached data and resource estimates")
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rootflat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateFormatError as exc:
        print(f"rootflat {args.command}: malformed certificate: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"rootflat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
