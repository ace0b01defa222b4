import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from greenfb.graph import from_arrays

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_digraph(n, rng, p=0.15, weighted=True, dangling=True):
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    if dangling and n > 2:
        mask[rng.integers(n)] = False
    src, dst = np.nonzero(mask)
    w = rng.uniform(0.2, 3.0, size=src.size) if weighted else None
    return from_arrays(n, src, dst, w)


def dense_teleported(A, alpha):
    """Oracle: the teleported transition matrix built entrywise."""
    n = A.shape[0]
    deg = A.sum(axis=1)
    P = np.empty((n, n))
    for i in range(n):
        P[i] = A[i] / deg[i] if deg[i] > 0 else 1.0 / n
    return alpha * P + (1 - alpha) / n


def stationary_eig(P):
    """Oracle: stationary law from the left eigenvector of eigenvalue 1."""
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    return pi / pi.sum()


@st.composite
def digraphs(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**31 - 1))
    p = draw(st.floats(0.0, 0.6))
    return random_digraph(n, np.random.default_rng(seed), p=p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
