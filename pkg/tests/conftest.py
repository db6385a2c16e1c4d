import numpy as np
import pytest

from shearlab.discretization import Grid
from shearlab.profile import quadratic_well

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def canonical():
    return quadratic_well()


@pytest.fixture(scope="session")
def grid1024():
    return Grid(1024)


@pytest.fixture(scope="session")
def grid256():
    return Grid(256)


@pytest.fixture(scope="session")
def sine1024(grid1024):
    return np.sin(np.pi * grid1024.y) + 0j


@pytest.fixture
def verdict():
    """Print and record one PASS/FAIL line, then assert it."""

    def _emit(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return _emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
