import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def random_state(rng, dim, support=None):
    """Normalized random complex state, optionally with bounded support."""
    top = dim if support is None else support
    amps = np.zeros(dim, dtype=complex)
    amps[:top] = rng.normal(size=top) + 1j * rng.normal(size=top)
    return amps / np.linalg.norm(amps)
