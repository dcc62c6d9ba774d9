import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hoferlike.torus import TorusGrid

settings.register_profile("hoferlike", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hoferlike")

TAU = 2.0 * np.pi


@pytest.fixture(scope="session")
def g64():
    return TorusGrid(64)


@pytest.fixture(scope="session")
def g128():
    return TorusGrid(128)


def trig_field(grid, modes):
    """Sum of c cos(2 pi (kx x + ky y) + phase) over (kx, ky, c, phase) tuples."""
    X, Y = grid.mesh
    f = np.zeros((grid.N, grid.N))
    for kx, ky, c, ph in modes:
        f += c * np.cos(TAU * (kx * X + ky * Y) + ph)
    return f


# PASS/FAIL lines recorded by test_acceptance.py, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
