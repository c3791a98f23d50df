import numpy as np
import pytest

from minresqlp.oracle import eigendecomposition
from minresqlp.problems import laplacian_block


@pytest.fixture(scope="session")
def laplacian20():
    return laplacian_block(20)


@pytest.fixture(scope="session")
def laplacian20_evd(laplacian20):
    # the 400x400 eigendecomposition is the expensive shared oracle
    return eigendecomposition(laplacian20.array)


def random_symmetric(rng, n, nullity=0, lo=0.5, hi=2.0, definite=False):
    """Well-conditioned symmetric test matrix with a prescribed nullity."""
    lam = lo + (hi - lo) * rng.random(n)
    if not definite:
        lam *= np.where(rng.random(n) < 0.5, -1.0, 1.0)
    if nullity:
        lam[:nullity] = 0.0
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q @ np.diag(lam) @ q.T
    return 0.5 * (a + a.T)
