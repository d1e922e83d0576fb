"""Reading and writing certificate files.

Text format::

    rootflat-certificate v1
    n 7
    m 5
    layer 0
    <m^(n-1) lines: the n directions d_0(w_i, 0..n-1) separated by spaces>
    layer 1
    ...

Line i of a layer block belongs to root-flat state index i.  The binary
companion is a 16-byte little-endian header (magic ``RFC1``, u32 n, u32 m,
u32 reserved = 0) followed by the direction bytes in (t, w, k) order.
"""

from __future__ import annotations

import io
import os
import struct

import numpy as np

from .certificate import Certificate
from .errors import CertificateFormatError
from .torus import rootflat_size

TEXT_MAGIC = "rootflat-certificate v1"
BINARY_MAGIC = b"RFC1"
_HEADER = struct.Struct("<4sIII")
BINARY_SUFFIXES = (".rfcb", ".bin")


def _is_binary_path(path) -> bool:
    return str(path).endswith(BINARY_SUFFIXES)


def write_certificate(c: Certificate, sink, binary: bool | None = None) -> None:
    """Write to a path or a file object.  Paths ending in .rfcb/.bin default to binary."""
    if isinstance(sink, (str, os.PathLike)):
        if binary is None:
            binary = _is_binary_path(sink)
        with open(sink, "wb") as fh:
            write_certificate(c, fh, binary)
        return
    if binary:
        sink.write(_HEADER.pack(BINARY_MAGIC, c.n, c.m, 0))
        sink.write(c.table.tobytes())
        return
    out = _writer(sink)
    out.write(f"{TEXT_MAGIC}\nn {c.n}\nm {c.m}\n".encode())
    for t in range(c.m):
        out.write(f"layer {t}\n".encode())
        out.write(_format_layer(c.table[t]))


def _writer(sink):
    return sink if not isinstance(sink, io.TextIOBase) else sink.buffer


def _format_layer(rows: np.ndarray) -> bytes:
    size, n = rows.shape
    if n <= 10:
        # fixed-width rows: digit, space, digit, ..., newline
        buf = np.full((size, 2 * n), ord(" "), dtype=np.uint8)
        buf[:, 0::2] = rows + ord("0")
        buf[:, -1] = ord("\n")
        return buf.tobytes()
    return "".join(" ".join(map(str, r)) + "\n" for r in rows.tolist()).encode()


def read_certificate(source) -> Certificate:
    """Read either format (detected from the first bytes) from a path or binary file object."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            cert = read_certificate(fh)
        return Certificate(cert.n, cert.m, cert.table, provenance=f"file {os.fspath(source)}")
    data = source.read()
    if isinstance(data, str):
        data = data.encode()
    if data[:4] == BINARY_MAGIC:
        return _read_binary(data)
    return _read_text(data)


def _read_binary(data: bytes) -> Certificate:
    if len(data) < _HEADER.size:
        raise CertificateFormatError("truncated header", "byte 0")
    _, n, m, reserved = _HEADER.unpack_from(data)
    if reserved != 0:
        raise CertificateFormatError(f"reserved header field is {reserved}, expected 0", "byte 12")
    if n < 2 or m < 2:
        raise CertificateFormatError(f"bad dimensions n={n}, m={m}", "byte 4")
    expected = m * rootflat_size(n, m) * n
    actual = len(data) - _HEADER.size
    if actual != expected:
        raise CertificateFormatError(f"expected {expected} direction entries, found {actual}", f"byte {_HEADER.size}")
    table = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    bad = np.flatnonzero(table >= n)
    if bad.size:
        raise CertificateFormatError(
            f"direction {table[bad[0]]} out of range for n={n}", f"byte {_HEADER.size + int(bad[0])}"
        )
    return Certificate(n, m, table.reshape(m, rootflat_size(n, m), n).copy())


def _header_value(lines: list[bytes], lineno: int, key: str) -> int:
    if lineno >= len(lines):
        raise CertificateFormatError(f"missing '{key}' header", f"line {lineno + 1}")
    parts = lines[lineno].split()
    if len(parts) != 2 or parts[0] != key.encode() or not parts[1].isdigit():
        raise CertificateFormatError(f"expected '{key} <int>', got {lines[lineno][:40]!r}", f"line {lineno + 1}")
    return int(parts[1])


def _read_text(data: bytes) -> Certificate:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if not lines or lines[0].strip() != TEXT_MAGIC.encode():
        raise CertificateFormatError(f"missing '{TEXT_MAGIC}' header", "line 1")
    n = _header_value(lines, 1, "n")
    m = _header_value(lines, 2, "m")
    if n < 2 or m < 2:
        raise CertificateFormatError(f"bad dimensions n={n}, m={m}", "line 2")
    size = rootflat_size(n, m)
    expected_lines = 3 + m * (size + 1)
    if len(lines) != expected_lines:
        raise CertificateFormatError(
            f"expected {m * size * n} direction entries ({expected_lines} lines), "
            f"found {len(lines)} lines ({max(0, len(lines) - 3 - m) * n} entries)",
            f"line {len(lines)}",
        )
    table = np.empty((m, size, n), dtype=np.uint8)
    pos = 3
    for t in range(m):
        if lines[pos].strip() != f"layer {t}".encode():
            raise CertificateFormatError(f"expected 'layer {t}', got {lines[pos][:40]!r}", f"line {pos + 1}")
        pos += 1
        table[t] = _parse_rows(lines[pos : pos + size], n, pos)
        pos += size
    return Certificate(n, m, table)


def _parse_rows(rows: list[bytes], n: int, first_line: int) -> np.ndarray:
    width = 2 * n - 1
    if n <= 10 and rows and all(len(r) == width for r in rows):
        buf = np.frombuffer(b"".join(rows), dtype=np.uint8).reshape(len(rows), width)
        digits = buf[:, 0::2] - ord("0")
        if (buf[:, 1::2] == ord(" ")).all() and (digits < n).all():
            return digits
    # slow path, also used to locate the offending line
    out = np.empty((len(rows), n), dtype=np.uint8)
    for i, row in enumerate(rows):
        parts = row.split()
        where = f"line {first_line + i + 1}"
        if len(parts) != n:
            raise CertificateFormatError(f"expected {n} entries, got {len(parts)}", where)
        for k, tok in enumerate(parts):
            if not tok.isdigit():
                raise CertificateFormatError(f"entry {tok!r} is not a direction", where)
            v = int(tok)
            if v >= n:
                raise CertificateFormatError(f"direction {v} out of range for n={n} (color {k})", where)
            out[i, k] = v
    return out
