import numpy as np
import pytest


def skew(n, i, j):
    """Hand-built endomorphism of e_i ^ e_j (1-based): e_i -> e_j, e_j -> -e_i."""
    A = np.zeros((n, n))
    A[j - 1, i - 1] = 1.0
    A[i - 1, j - 1] = -1.0
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
