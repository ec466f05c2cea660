import warnings

import numpy as np
import pytest

from kkps.model import SaturationWarning, build_world

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def hand_world():
    """k=2, m=2, n=4 world with hand-picked entries."""
    R = [[0.5, 0.0], [0.0, 2.0]]
    D = [[1.0, 0.0, 3.0, 0.0], [0.0, 4.0, 0.0, 0.0]]
    return build_world(D, R)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _quiet_saturation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
