import numpy as np
import pytest

from q6.constants import build_constants
from q6.delaunay import continue_family, shoot_delaunay

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def c10():
    return build_constants(10)


@pytest.fixture(scope="session")
def sweep20(c10):
    """The 20-point necksize sweep 0.99 -> 0.05 eps_star used throughout."""
    return continue_family(c10, np.linspace(0.99, 0.05, 20) * c10.eps_star)


@pytest.fixture(scope="session")
def orbit_half(c10):
    return shoot_delaunay(c10, 0.5 * c10.eps_star)


@pytest.fixture(scope="session")
def orbit_near(c10):
    return shoot_delaunay(c10, 0.999 * c10.eps_star)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
