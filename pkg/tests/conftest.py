import numpy as np
import pytest

from rootflat.certificate import certificate_from_schedule
from rootflat.counts import build_schedule
from rootflat.search import cached_boundary_certificate


@pytest.fixture(scope="session")
def cert3():
    cert = cached_boundary_certificate(3)
    assert cert is not None, "cached m=3 certificate missing from package data"
    return cert


@pytest.fixture(scope="session")
def cert7():
    return certificate_from_schedule(build_schedule(7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _selector_tables(m):
    import json
    from importlib import resources

    with (resources.files("rootflat") / "data" / f"boundary_m{m}.json").open() as fh:
        return np.array(json.load(fh)["tables"])


@pytest.fixture(scope="session")
def broken_cert3():
    """One swap move away from the cached m=3 certificate: C1 and C2 hold, C3 fails."""
    from rootflat.search import SelectorFamily

    family = SelectorFamily.build(3)
    tables = _selector_tables(3)
    for t in range(3):
        for c0 in range(family.n_classes):
            for k1, k2 in [(0, 1), (2, 5), (3, 6)]:
                a, b = tables[t, c0, k1], tables[t, c0, k2]
                labels = family.swap_regions(a, b)
                region = np.flatnonzero(labels == labels[c0])
                if (tables[t, region, k1] == a).all() and (tables[t, region, k2] == b).all():
                    trial = tables.copy()
                    trial[t, region, k1], trial[t, region, k2] = b, a
                    cert = family.expand(trial)
                    from rootflat.certificate import check_certificate

                    report = check_certificate(cert)
                    if report.c1.passed and report.c2.passed and not report.c3.passed:
                        return cert
    raise AssertionError("no single swap breaks C3")


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
