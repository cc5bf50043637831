import numpy as np
import pytest

from movnet.config import fixture

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def default_config():
    return fixture("default")


@pytest.fixture(scope="session")
def pair_config():
    return fixture("pair")


@pytest.fixture
def record_criterion():
    """Register an acceptance verdict; printed in the terminal summary."""

    def record(key, passed, detail):
        _CRITERIA[key] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int("".join(c for c in k if c.isdigit()) or 0), k)):
        passed, detail = _CRITERIA[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {detail}")
