import numpy as np
import pytest

from rfeh_diversity.channel import ChannelConfig, sample_channels

PL = 1e-3


@pytest.fixture(scope="session")
def rayleigh_draws():
    """10^6 trials per K, shared by the statistical checks."""
    cache = {}

    def get(k, seed=7):
        if (k, seed) not in cache:
            cache[k, seed] = sample_channels(ChannelConfig(k, PL), seed, 0, 1_000_000)
        return cache[k, seed]

    return get


def rayleigh(rng, k, pl=PL):
    return np.sqrt(pl / 2) * (rng.standard_normal(k) + 1j * rng.standard_normal(k))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "_REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
