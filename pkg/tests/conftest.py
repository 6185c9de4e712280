import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from freestein import measure as m

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE]


@pytest.fixture(scope="session")
def small_semicircle():
    return m.semicircle(0.0, 1.0, n=1001)


@pytest.fixture(scope="session")
def unit_uniform():
    return m.uniform(np.sqrt(3.0), n=1001)


def random_density(rng, n=401, width=None):
    """Random smooth density on a random interval, vanishing like a square root at both ends."""
    half = width or rng.uniform(0.5, 2.0)
    x = m.cheb_grid(-half, half, n)
    s = (x + half) / (2 * half)
    bumps = sum(rng.uniform(0.2, 1.0) * np.exp(-((s - c) / w) ** 2)
                for c, w in zip(rng.uniform(0.1, 0.9, 3), rng.uniform(0.1, 0.4, 3)))
    f = np.sqrt(np.clip(s * (1 - s), 0, None)) * (0.3 + bumps)
    f[0] = f[-1] = 0.0
    return m.center(m.Measure1D.build(x, f, label="random"))
