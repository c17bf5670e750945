import numpy as np
import pytest

from pulseopt.objectives import rb_transfer_problem


@pytest.fixture(scope="session")
def rb2():
    """Rb problem, target |2>, 200 fs window, coarse resolution for fast tests."""
    return rb_transfer_problem(2, 200.0, n_time=2048)


@pytest.fixture(scope="session")
def rb3():
    return rb_transfer_problem(3, 200.0, n_time=2048)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
