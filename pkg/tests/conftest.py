import numpy as np
import pytest

from urllcbeam import RandomStream, ScenarioConfig


@pytest.fixture
def gen():
    return RandomStream(12345).child(0).generator()


@pytest.fixture
def small_config():
    """Fast scenario: small candidate pool, short history, shallow MC."""
    return ScenarioConfig(
        num_antennas=6,
        num_embb=3,
        embb_sinr_targets=(10.0, 10.0, 10.0),
        num_candidates=60,
        history_len=80,
        mc_samples=5000,
        rng_seed=7,
    )


def random_channels(gen: np.random.Generator, m: int, n: int, scale: float = 1.0):
    z = gen.standard_normal((m, n, 2))
    return scale * (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
