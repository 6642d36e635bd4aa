import numpy as np
import pytest

from polspeckle.core.polcore import CoherencyMatrix, reference_matrices


@pytest.fixture
def reference():
    return reference_matrices()


@pytest.fixture(scope="session")
def random_pd():
    """1000 strictly positive definite matrices with |a2| <= 0.95 sqrt(a1 a4)."""
    rng = np.random.default_rng(1234)
    matrices = []
    for _ in range(1000):
        a1, a4 = rng.uniform(0.1, 100.0, size=2)
        modulus = rng.uniform(0.0, 0.95) * np.sqrt(a1 * a4)
        phase = rng.uniform(0.0, 2 * np.pi)
        matrices.append(CoherencyMatrix(a1=a1, a4=a4, a2=modulus * np.exp(1j * phase)))
    return matrices
