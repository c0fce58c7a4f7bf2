import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_disk_points(rng, n, radius=0.95):
    rho = radius * np.sqrt(rng.uniform(0, 1, n))
    return rho * np.exp(2j * np.pi * rng.uniform(0, 1, n))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
