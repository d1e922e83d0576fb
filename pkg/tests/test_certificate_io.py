import io

import numpy as np
import pytest

from rootflat.certificate import Certificate, check_certificate, constant_certificate
from rootflat.certificate_io import TEXT_MAGIC, read_certificate, write_certificate
from rootflat.errors import CertificateFormatError


def roundtrip(cert, binary):
    buf = io.BytesIO()
    write_certificate(cert, buf, binary=binary)
    buf.seek(0)
    return read_certificate(buf), buf.getvalue()


@pytest.mark.parametrize("binary", [False, True])
def test_roundtrip(cert3, binary):
    back, _ = roundtrip(cert3, binary)
    assert back == cert3


def test_text_layout(cert3):
    _, data = roundtrip(cert3, False)
    lines = data.decode().splitlines()
    assert lines[:4] == [TEXT_MAGIC, "n 7", "m 3", "layer 0"]
    assert len(lines) == 3 + 3 * (729 + 1)
    assert lines[4] == " ".join(map(str, cert3.table[0, 0]))


def test_binary_layout(cert3):
    _, data = roundtrip(cert3, True)
    assert data[:4] == b"RFC1"
    assert int.from_bytes(data[4:8], "little") == 7
    assert int.from_bytes(data[8:12], "little") == 3
    assert len(data) == 16 + 3 * 729 * 7


def test_path_suffix_selects_binary(cert3, tmp_path):
    write_certificate(cert3, tmp_path / "c.rfcb")
    assert (tmp_path / "c.rfcb").read_bytes()[:4] == b"RFC1"
    back = read_certificate(tmp_path / "c.rfcb")
    assert back == cert3 and "c.rfcb" in back.provenance


def test_truncated_text(cert3):
    _, data = roundtrip(cert3, False)
    cut = b"\n".join(data.split(b"\n")[:-50]) + b"\n"
    with pytest.raises(CertificateFormatError) as err:
        read_certificate(io.BytesIO(cut))
    assert "expected 15309 direction entries" in str(err.value)


def test_truncated_binary(cert3):
    _, data = roundtrip(cert3, True)
    with pytest.raises(CertificateFormatError) as err:
        read_certificate(io.BytesIO(data[:-5]))
    assert "expected 15309" in str(err.value) and "found 15304" in str(err.value)


def test_out_of_range_entry(cert3):
    _, data = roundtrip(cert3, False)
    lines = data.split(b"\n")
    lines[10] = b"7" + lines[10][1:]
    with pytest.raises(CertificateFormatError) as err:
        read_certificate(io.BytesIO(b"\n".join(lines)))
    assert "line 11" in str(err.value) and "out of range" in str(err.value)


def test_out_of_range_binary(cert3):
    _, data = roundtrip(cert3, True)
    data = bytearray(data)
    data[100] = 9
    with pytest.raises(CertificateFormatError) as err:
        read_certificate(io.BytesIO(bytes(data)))
    assert "byte 100" in str(err.value)


def test_bad_headers():
    with pytest.raises(CertificateFormatError, match="line 1"):
        read_certificate(io.BytesIO(b"hello\n"))
    with pytest.raises(CertificateFormatError, match="line 2"):
        read_certificate(io.BytesIO(f"{TEXT_MAGIC}\nn seven\n".encode()))
    cert = constant_certificate(3, 3, [0, 1, 2])
    buf = io.BytesIO()
    write_certificate(cert, buf)
    data = buf.getvalue().replace(b"layer 1", b"layer 5")
    with pytest.raises(CertificateFormatError, match="expected 'layer 1'"):
        read_certificate(io.BytesIO(data))


def test_header_driven_n5(rng):
    m = 3
    cert = constant_certificate(5, m, [[0, 1, 2, 3, 4]] * m)
    back, data = roundtrip(cert, False)
    assert back.n == 5 and back.table.shape == (3, 81, 5)
    assert check_certificate(back).c1.passed


def test_large_direction_values_text():
    # n > 10 uses multi-digit directions
    m, n = 2, 12
    table = np.tile(np.arange(n, dtype=np.uint8), (m, 2 ** (n - 1), 1))
    cert = Certificate(n, m, table)
    back, _ = roundtrip(cert, False)
    assert back == cert
