import numpy as np
import pytest

from nestedmzi.interferometer import preset_griffiths_eq22
from nestedmzi.probes import seven_local_probes


@pytest.fixture
def spec():
    return preset_griffiths_eq22()


@pytest.fixture
def seven():
    return seven_local_probes(1e-4)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
