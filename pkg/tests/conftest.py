import math

import numpy as np
import pytest

from nsstab import BoundaryData, Laws, PowerViscosity, saint_venant_pressure
from nsstab import steady

V_STAR_FIG4 = math.sqrt(0.375)


@pytest.fixture(scope="session")
def sv_laws():
    return Laws(saint_venant_pressure(1.0), PowerViscosity(1.0, 1.0))


@pytest.fixture(scope="session")
def fig4_boundary():
    return BoundaryData(1.0, 0.1, 0.5, 1.0, V_STAR_FIG4)


@pytest.fixture(scope="session")
def fig4_alpha(sv_laws, fig4_boundary):
    return steady.solve_alpha_star(fig4_boundary, sv_laws)


@pytest.fixture(scope="session")
def fig4_profile_100(sv_laws, fig4_boundary, fig4_alpha):
    return steady.integrate_connection(fig4_alpha, fig4_boundary, 100, sv_laws)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
