import numpy as np
import pytest

from metrol.spectral import pbg_system

# mpmath (30 digits) root of y(E) = E from the defining frequency integral
E0_REF = 75.9926457173814301
Z_REF = 0.922968178052867266


@pytest.fixture(scope="session")
def gap20():
    """omega_c = 100, delta = -20: atom in the gap."""
    return pbg_system(-20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the terminal summary, then assert."""

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        print(line)
        _VERDICTS.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
