"""
Shared fixtures for the Tracefill test suite.
"""

import numpy as np
import pytest

from config.settings import reset_settings
from core.masking import TraceMask
from ingest.gather import Gather


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Each test sees settings rebuilt from its own environment."""
    for key in ("ZSCL_ITERATIONS", "ZSCL_LEARNING_RATE", "ZSCL_SEED", "ZSCL_LOG_LEVEL",
                "ZSCL_BENCHMARK_WORKERS", "ZSCL_TILE_SAMPLES", "ZSCL_TILE_TRACES", "ZSCL_LOG_EVERY"):
        monkeypatch.delenv(key, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_gather(rng):
    """16 samples x 16 traces of smooth-ish data, every trace live."""
    t = np.linspace(0, 1, 16)[:, None]
    x = np.linspace(0, 1, 16)[None, :]
    data = np.sin(6 * t + 3 * x) + 0.1 * rng.standard_normal((16, 16))
    return Gather(data.astype(np.float32), dt=0.004)


@pytest.fixture
def half_mask():
    keep = np.array([1, 0] * 8, dtype=np.uint8)
    return TraceMask(keep, "alternate")
