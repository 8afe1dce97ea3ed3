import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "steinkit", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("steinkit")

SIGMA2 = np.array([[1.3, 0.4], [0.4, 0.8]])
SIGMA3 = np.array([[1.2, 0.3, -0.2], [0.3, 1.0, 0.25], [-0.2, 0.25, 0.9]])


@pytest.fixture
def sigma2():
    return SIGMA2.copy()


@pytest.fixture
def sigma3():
    return SIGMA3.copy()


def halton_points(n, d, scale=2.5, start=1):
    """Deterministic quasi-random points in [-scale, scale]^d."""
    from scipy.stats import qmc

    u = qmc.Halton(d, scramble=False).random(n + start)[start:]
    return scale * (2.0 * u - 1.0)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
