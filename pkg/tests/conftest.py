import math

import numpy as np
import pytest

from fockstab.config import ExperimentConfig
from fockstab.lyapunov import ControlParams, sigma_table

PAPER_THETA = math.pi / 4 - 3 * math.sqrt(2) / 5
PAPER_PHI = math.sqrt(2) / 5


def random_states(rng, dim, count):
    z = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def paper_params():
    return ControlParams(alpha_bar=0.1, delta=1 / 220, n_bar=3, theta=PAPER_THETA, phi=PAPER_PHI)


@pytest.fixture
def sigma21():
    return sigma_table(3, 21)


@pytest.fixture
def small_config():
    return ExperimentConfig(horizon=20, trajectories=6, master_seed=11)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
