import numpy as np
import pytest

from ppgdenoise.signals import RawSignal


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ramp_window():
    """Non-constant 256-sample raw window spanning [0, 2]."""
    return np.linspace(0.0, 2.0, 256)


@pytest.fixture
def sine_signal():
    t = np.arange(1024) / 32.0
    return RawSignal(np.sin(2 * np.pi * 1.1 * t) + 0.2 * t, 32.0, "sine")
