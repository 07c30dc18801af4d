import numpy as np
import pytest

from experiments import haar_unitary, random_kernel
from kernel import validate_kernel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_kernel(rng):
    """Factory for random Hermitian contractions with a Haar eigenbasis."""
    def _make(n, max_eigenvalue=1.0):
        return random_kernel(n, rng, max_eigenvalue=max_eigenvalue)
    return _make


@pytest.fixture
def make_unitary(rng):
    def _make(n):
        return haar_unitary(n, rng)
    return _make


@pytest.fixture
def diag_kernel():
    return validate_kernel(np.diag([0.5, 0.25]))


@pytest.fixture
def rank_one_kernel():
    return validate_kernel(np.array([[0.5, 0.5], [0.5, 0.5]]))
