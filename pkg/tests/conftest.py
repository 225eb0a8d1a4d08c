import numpy as np
import pytest

from panelid.model_core import make_theta, random_theta


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def theta_r1_t4(rng):
    return random_theta("Baseline", 4, 1, rng)


@pytest.fixture
def theta_fixed():
    return make_theta(
        "Baseline", 0.5, [1.0, 0.8, -0.5, 1.2, 0.3, -0.9], 1.0, d=[1.0, 1.2, 0.8, 1.0, 1.5, 0.9]
    )


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
