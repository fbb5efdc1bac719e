import numpy as np
import pytest

from csiregion.channel import ChannelProfile, PrbGeometry


@pytest.fixture
def geom():
    return PrbGeometry()


@pytest.fixture
def static_profile():
    """No Doppler, no delay spread: every PRB entry is the same coefficient."""
    return ChannelProfile(velocity=0.0, max_delay_spread=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n, psd=False):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T if psd else 0.5 * (a + a.conj().T)


def random_channel(rng, n, k):
    return (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=lambda k: int(k)):
            terminalreporter.write_line(lines[key])
