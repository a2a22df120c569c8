import math

import numpy as np
import pytest

from dwtunnel import DrivePotential, make_grid

PI_QUARTER = math.pi ** -0.25


@pytest.fixture(scope="session")
def grid():
    return make_grid(16.0, 2048)


@pytest.fixture(scope="session")
def drive_pot():
    return DrivePotential(alpha=0.0005, beta=0.0001, epsilon=2.0)


def ground_state(grid, center=0.0):
    return PI_QUARTER * np.exp(-((grid.nodes - center) ** 2) / 2)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
