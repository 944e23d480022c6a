import numpy as np
import pytest

from pimcancel import kernels
from pimcancel._accel import HAVE_NUMBA
from pimcancel.rng import SplitMix64
from pimcancel.signal import IqSequence

FS = 30.72e6

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def random_seq(seed, n, power=1.0, fs=FS):
    return IqSequence(SplitMix64(seed).complex_normal(n, power), fs)


@pytest.fixture
def fs():
    return FS


@pytest.fixture
def pair():
    return random_seq(11, 512), random_seq(12, 512)


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the dispatching kernels through one backend for the test."""
    mod = kernels.get_backend(request.param)
    for name in ("data_matrix", "rls", "lms", "stream_cancel"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# (criterion, PASS/FAIL line) pairs filled in by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
