import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from modelcr.geometry import BoundaryPoint

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda text: int(text.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


coord = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def boundary_points(draw, lo=-3.0, hi=3.0):
    x1, x2, t = (draw(st.floats(lo, hi, allow_nan=False)) for _ in range(3))
    return BoundaryPoint.from_real(x1, x2, t)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_point(rng, scale=1.0):
    return BoundaryPoint([complex(*rng.normal(scale=scale, size=2))], rng.normal(scale=scale))


def sign_change_count(ratio, per_interval=4000):
    """Roots of tau/sin^2 tau - cot tau = ratio on tau > 0 by scanning a fine grid."""
    top = int(math.ceil(ratio / math.pi)) + 1
    count = 0
    for m in range(top + 1):
        tau = m * math.pi + np.linspace(0, math.pi, per_interval + 2)[1:-1]
        s = np.sin(tau)
        g = tau / s**2 - np.cos(tau) / s - ratio
        count += int(np.sum(np.sign(g[:-1]) != np.sign(g[1:])))
    return count
