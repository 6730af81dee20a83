import numpy as np
import pytest

from epcluster.lattice import LatticeSpec, profile_sin_squared, profile_staggered, profile_uniform


def chain(n, t, tp, gamma=0.0, boundary="open"):
    return LatticeSpec.uniform(n, t, tp, gamma, boundary)


def staggered_spec(gamma):
    return LatticeSpec(20, profile_uniform(20, 0.1), profile_uniform(20, 0.01), profile_staggered(20, gamma))


def sin_ring_spec(n=12):
    return LatticeSpec(n, profile_uniform(n, 0.1), profile_sin_squared(n, 0.1, 3.0), profile_uniform(n, 0.0), "ring")


def random_spec(rng, n_max=64):
    n = int(rng.integers(2, n_max + 1))
    return LatticeSpec(
        n,
        rng.uniform(-1, 1, n),
        rng.uniform(-1, 1, n),
        rng.uniform(-0.5, 0.5, n),
        "ring" if rng.random() < 0.5 else "open",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
