import numpy as np
import pytest

from rootflat.certificate import (
    Certificate,
    check_certificate,
    check_layer_bijective,
    check_primitive_return,
    check_row_latin,
    constant_certificate,
    return_cycle_type,
    rotated_return_map,
)
from rootflat.counts import build_schedule, cycle_type
from rootflat.certificate import certificate_from_schedule
from rootflat.prefix import Symbol, phi_inv
from rootflat.torus import RootFlatPoint, q


def with_entry(cert, t, w, k, value):
    table = cert.table.copy()
    table[t, w, k] = value
    return Certificate(cert.n, cert.m, table)


def test_shape_and_range_validation():
    with pytest.raises(ValueError):
        Certificate(7, 3, np.zeros((3, 10, 7), dtype=np.uint8))
    with pytest.raises(ValueError):
        Certificate(2, 3, np.full((3, 3, 2), 2, dtype=np.uint8))


def test_table_is_read_only(cert3):
    with pytest.raises(ValueError):
        cert3.table[0, 0, 0] = 1


def test_row_latin_identity_rows():
    assert check_row_latin(constant_certificate(7, 3, range(7))).passed


def test_row_latin_planted_violation():
    cert = with_entry(constant_certificate(7, 3, range(7)), 2, 100, 3, 4)
    report = check_row_latin(cert)
    assert not report.passed
    assert (report.locus["t"], report.locus["w"]) == (2, 100)


def test_layer_bijective_trivial_cases():
    assert check_layer_bijective(constant_certificate(7, 3, [6] * 7)).passed
    assert check_layer_bijective(constant_certificate(7, 3, [0] * 7)).passed


def test_layer_bijective_planted_collision():
    m = 3
    # w = 0 steps by q_0 and w2 = q_0 - q_1 steps by q_1: both land on q_0
    w2 = RootFlatPoint.from_vec(q(0, 7, m) - q(1, 7, m)).index
    cert = constant_certificate(7, m, [6, 6, 0, 6, 6, 6, 6])
    cert = with_entry(cert, 1, w2, 2, 1)
    report = check_layer_bijective(cert)
    assert not report.passed
    assert report.locus["t"] == 1 and report.locus["color"] == 2
    assert {report.locus["w"], report.locus["w2"]} == {0, w2}


def test_primitive_return_failures():
    report = check_primitive_return(constant_certificate(7, 3, [6] * 7))
    assert not report.passed and report.cycle_lengths == [1] * 7
    toy = constant_certificate(2, 3, [0, 1])
    assert not check_primitive_return(toy).passed  # 3 * q_0 = 0
    single = constant_certificate(2, 3, [[0, 1], [1, 0], [1, 0]])
    assert check_primitive_return(single).cycle_lengths[0] == 3


def test_primitive_return_refuses_without_bijective_layers():
    m = 3
    w2 = RootFlatPoint.from_vec(q(0, 7, m) - q(1, 7, m)).index
    cert = with_entry(with_entry(constant_certificate(7, m, [6] * 7), 0, 0, 0, 0), 0, w2, 0, 1)
    with pytest.raises(ValueError):
        check_primitive_return(cert)
    report = check_certificate(cert)
    assert report.c3 is None and report.first_failure == "C1"


def test_schedule_certificate_m7(cert7):
    report = check_certificate(cert7)
    assert report.passed
    assert report.c3.cycle_lengths == [7**6] * 7
    assert "color.0.cycle_len=117649" in report.lines()


def test_schedule_entries():
    schedule = build_schedule(7)
    cert = certificate_from_schedule(schedule, sample=16)
    layer = schedule.symbols[0]
    zero_color = layer.index(Symbol.ZERO)
    delta_color = layer.index(Symbol.DELTA)
    assert (cert.table[0, :, zero_color] == 6).all()
    w = phi_inv((1,) * 6, 7).index
    assert cert.direction(0, w, delta_color) == 0


def test_rotation_conjugacy(cert3):
    for k in range(7):
        base = return_cycle_type(cert3, k)
        for start in range(3):
            assert cycle_type(rotated_return_map(cert3, k, start)) == base


def test_rotation_conjugacy_broken():
    cert = constant_certificate(7, 3, [[0, 1, 2, 3, 4, 5, 6], [6, 0, 1, 2, 3, 4, 5], [5, 6, 0, 1, 2, 3, 4]])
    for k in range(7):
        base = return_cycle_type(cert, k)
        for start in range(3):
            assert cycle_type(rotated_return_map(cert, k, start)) == base


def test_report_lines(cert3):
    lines = check_certificate(cert3).lines()
    assert lines[:3] == ["check.c1=pass", "check.c2=pass", "check.c3=pass"]
    assert lines.count("color.6.cycle_len=729") == 1


def test_single_corruptions_rejected(cert3, rng):
    for _ in range(50):
        t, w, k = int(rng.integers(3)), int(rng.integers(729)), int(rng.integers(7))
        old = int(cert3.table[t, w, k])
        new = (old + 1 + int(rng.integers(6))) % 7
        assert not check_certificate(with_entry(cert3, t, w, k, new)).passed
