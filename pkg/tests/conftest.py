import numpy as np
import pytest

from riscache.scenario import ScenarioConfig, gen_channels, place_users

_CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERIA):
        terminalreporter.write_line(line[1])


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(number, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return passed

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_instance(seed, M=8, K=3, N=16, **kw):
    cfg = ScenarioConfig(M=M, K=K, N=N, **kw)
    r = np.random.default_rng(seed)
    users = place_users(cfg, r)
    return cfg, gen_channels(cfg, users, r)


@pytest.fixture
def small_instance():
    return make_instance(0, M=4, K=2, N=8)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
