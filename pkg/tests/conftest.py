import numpy as np
import pytest

from zitterlab.momentum_grid import MomentumGrid

ACCEPTANCE_LINES = []


@pytest.fixture
def grid_1d():
    return MomentumGrid(dim=1, p_max=1.0, n_per_axis=64, mass=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
