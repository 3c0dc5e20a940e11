import math

import pytest

from slrot.scan import ScanConfig, scan
from slrot.triples import free, periodic_example, quasiperiodic_example

TWO_PI = 2 * math.pi

# grids shared by the acceptance and scan tests
FIG1_SCAN = ScanConfig(-1.0, 3.0, 401)
FIG2_SCAN = ScanConfig(-1.0, 3.0, 401)


@pytest.fixture(scope="session")
def free_v():
    return free()


@pytest.fixture(scope="session")
def fig1():
    return periodic_example()


@pytest.fixture(scope="session")
def fig2():
    return quasiperiodic_example()


@pytest.fixture(scope="session")
def fig1_scan(fig1):
    return scan(fig1, FIG1_SCAN)


@pytest.fixture(scope="session")
def fig2_scan(fig2):
    return scan(fig2, FIG2_SCAN)


@pytest.fixture(scope="session")
def fig1_oracle_gaps(fig1):
    from slrot.periodic import gap_intervals
    return gap_intervals(fig1, TWO_PI, FIG1_SCAN.lambda_min, FIG1_SCAN.lambda_max, 200)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict = {}


def record(n: int, ok: bool, detail: str) -> bool:
    prev = ACCEPTANCE.get(n)
    ACCEPTANCE[n] = (bool(ok) and (prev is None or prev[0]),
                     detail if prev is None else f"{prev[1]}; {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
