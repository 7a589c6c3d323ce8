import numpy as np
import pytest

from symmetra.construct import SIGMA, platonic_symmetry
from symmetra.groups import close_generators
from symmetra.io import load_group

I2 = np.eye(2, dtype=complex)
SX, SY, SZ = SIGMA


@pytest.fixture(scope="session")
def quaternion():
    return close_generators([1j * SX, 1j * SZ])


@pytest.fixture(scope="session")
def binary_octahedral():
    return load_group("binary_octahedral")


@pytest.fixture(scope="session")
def binary_icosahedral():
    return load_group("binary_icosahedral")


@pytest.fixture(scope="session")
def octahedron():
    return platonic_symmetry("octahedron")


@pytest.fixture(scope="session")
def dodecahedron():
    return platonic_symmetry("dodecahedron")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# ------------------------------------------------------- acceptance summary

_CRITERIA: dict[int, tuple[str, str, float]] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        num, _, label = name[len("test_criterion_"):].partition("_")
        verdict = "PASS" if report.outcome == "passed" else report.outcome.upper().replace("FAILED", "FAIL")
        _CRITERIA[int(num)] = (label.replace("_", " "), verdict, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERIA):
        label, verdict, secs = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}  {verdict:4s}  {label} ({secs:.1f} s)")
