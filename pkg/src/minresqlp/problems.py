"""Reproducible test problems: the block Laplacian family, Householder-
disguised diagonal matrices, seeded random singular instances, right-hand
side generators, and the name registry the CLI resolves problems through.

Randomness comes from a fixed 64-bit linear congruential generator so that
instances are bit-reproducible anywhere (constants below), independent of
any library RNG.
"""

from __future__ import annotations

import math

import numpy as np

from .operators import DenseSymmetricMatrix

# Knuth's MMIX multiplier/increment; doubles take the top 53 bits.
_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg:
    """64-bit LCG: state <- a*state + c mod 2^64, uniform = top bits / 2^53."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (_LCG_A * self.state + _LCG_C) & _MASK
        return self.state

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def normal(self) -> float:
        # Box-Muller; u in (0, 1] to keep the log finite
        u = 1.0 - self.uniform()
        v = self.uniform()
        return math.sqrt(-2.0 * math.log(u)) * math.cos(2.0 * math.pi * v)

    def normals(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)])


def laplacian_block(N: int) -> DenseSymmetricMatrix:
    """Singular indefinite block matrix of order N^2: block-tridiagonal with
    every nonzero block equal to the all-ones tridiagonal T of order N.
    Equivalently kron(T, T)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    t = np.eye(N) + np.eye(N, k=1) + np.eye(N, k=-1)
    return DenseSymmetricMatrix(np.kron(t, t))


def householder_diag(n: int, eta: float, null_dim: int = 5,
                     w_source: str = "padded_ones") -> DenseSymmetricMatrix:
    """Diagonal spectrum disguised by one Householder reflection.

    A = Q diag([0 x null_dim, eta, 2*eta, ramp]) Q with the ramp running
    linearly from 2 to 3 (so ||A|| = 3) and Q = I - 2ww'.  w comes from
    v = [0 x null_dim, 1, ..., 1] normalized (``padded_ones``) or from the
    all-ones vector normalized (``ones``).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    ramp_count = n - null_dim - 2
    if ramp_count < 2:
        raise ValueError(f"n = {n} too small for null_dim = {null_dim}")
    values = np.concatenate([np.zeros(null_dim), [eta, 2.0 * eta],
                             np.linspace(2.0, 3.0, ramp_count)])
    if w_source == "padded_ones":
        v = np.concatenate([np.zeros(null_dim), np.ones(n - null_dim)])
    elif w_source == "ones":
        v = np.ones(n)
    else:
        raise ValueError(f"unknown w_source {w_source!r}")
    w = v / np.linalg.norm(v)
    q = np.eye(n) - 2.0 * np.outer(w, w)
    return DenseSymmetricMatrix(q @ np.diag(values) @ q)


def householder_null_basis(n: int, null_dim: int = 5,
                           w_source: str = "padded_ones") -> np.ndarray:
    """Orthonormal basis of the null space of householder_diag (columns).

    The eigenvectors are the columns of Q, so the null basis is Q[:, :null_dim];
    for ``padded_ones`` these are exactly the first coordinate vectors.
    """
    if w_source == "padded_ones":
        v = np.concatenate([np.zeros(null_dim), np.ones(n - null_dim)])
    elif w_source == "ones":
        v = np.ones(n)
    else:
        raise ValueError(f"unknown w_source {w_source!r}")
    w = v / np.linalg.norm(v)
    q = np.eye(n) - 2.0 * np.outer(w, w)
    return q[:, :null_dim]


def random_singular(n: int, rank_deficit: int, seed: int,
                    spectrum: tuple[float, float] = (0.5, 2.0),
                    indefinite: bool = True) -> DenseSymmetricMatrix:
    """Well-conditioned symmetric matrix of order n with the given nullity.

    Nonzero eigenvalues are drawn uniformly from +-[lo, hi] (signs mixed when
    ``indefinite``); the eigenbasis is a product of three Householder
    reflections built from LCG normals, so the instance is reproducible from
    the seed alone.
    """
    if not 0 <= rank_deficit < n:
        raise ValueError("rank_deficit must be in [0, n)")
    rng = Lcg(seed)
    lo, hi = spectrum
    lam = np.zeros(n)
    for i in range(n - rank_deficit):
        mag = lo + (hi - lo) * rng.uniform()
        sign = -1.0 if (indefinite and rng.uniform() < 0.5) else 1.0
        lam[i] = sign * mag
    a = np.diag(lam)
    for _ in range(3):
        w = rng.normals(n)
        w /= np.linalg.norm(w)
        # Householder similarity: A <- (I - 2ww')A(I - 2ww')
        aw = a @ w
        waw = float(w @ aw)
        a = a - 2.0 * np.outer(w, aw) - 2.0 * np.outer(aw, w) \
            + 4.0 * waw * np.outer(w, w)
    return DenseSymmetricMatrix(a)


RHS_MODES = ("compatible", "incompatible", "almost_compatible", "ones", "a_ones")


def make_rhs(a: DenseSymmetricMatrix, mode: str, seed: int = 0) -> np.ndarray:
    """Deterministic right-hand sides.

    compatible:        b = Ay with y ~ U(0,1)
    incompatible:      b ~ U(0,1) (not in range(A) for singular A)
    almost_compatible: b = Ay + 1e-8 z with y, z ~ U(0,1)
    ones:              b = vector of ones
    a_ones:            b = A @ ones
    """
    n = a.n
    rng = Lcg(seed)
    if mode == "compatible":
        return a.apply(rng.uniforms(n))
    if mode == "incompatible":
        return rng.uniforms(n)
    if mode == "almost_compatible":
        y = rng.uniforms(n)
        z = rng.uniforms(n)
        return a.apply(y) + 1e-8 * z
    if mode == "ones":
        return np.ones(n)
    if mode == "a_ones":
        return a.apply(np.ones(n))
    raise ValueError(f"unknown rhs mode {mode!r}; expected one of {RHS_MODES}")


def example_rank1_diag() -> DenseSymmetricMatrix:
    """diag(1, 1, 0): the canonical singular system where plain MINRES
    returns the all-ones solution instead of the minimum-length one."""
    return DenseSymmetricMatrix(np.diag([1.0, 1.0, 0.0]))


def example_rank3_4x4() -> DenseSymmetricMatrix:
    """The 4x4 rank-3 compatible system with minimum-length solution
    (2, 4, 3, 2) for b = (6, 9, 6, 3)."""
    a = np.array([[1.0, 1.0, 0.0, 0.0],
                  [1.0, 1.0, 1.0, 0.0],
                  [0.0, 1.0, 0.0, 1.0],
                  [0.0, 0.0, 1.0, 0.0]])
    return DenseSymmetricMatrix(a)


def _parse_params(spec: str) -> dict[str, str]:
    if not spec:
        return {}
    out = {}
    for item in spec.split(","):
        if "=" not in item:
            raise ValueError(f"bad problem parameter {item!r} (need key=value)")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def build_problem(name_spec: str) -> DenseSymmetricMatrix:
    """Resolve ``name`` or ``name:key=value,...`` to a matrix.

    Registry: diag110, sec62, diag (d=2;1;0), laplacian (N), householder
    (n, eta, null_dim, w), random_singular (n, deficit, seed).
    """
    name, _, params_spec = name_spec.partition(":")
    params = _parse_params(params_spec)
    name = name.strip().lower()
    if name == "diag110":
        return example_rank1_diag()
    if name == "sec62":
        return example_rank3_4x4()
    if name == "diag":
        values = [float(v) for v in params.get("d", "").split(";") if v]
        if not values:
            raise ValueError("diag problem needs d=v1;v2;...")
        return DenseSymmetricMatrix(np.diag(values))
    if name == "laplacian":
        return laplacian_block(int(params.get("N", params.get("n", 20))))
    if name == "householder":
        return householder_diag(
            n=int(params.get("n", 797)),
            eta=float(params.get("eta", 1e-8)),
            null_dim=int(params.get("null_dim", 5)),
            w_source=params.get("w", "padded_ones"),
        )
    if name == "random_singular":
        return random_singular(
            n=int(params.get("n", 30)),
            rank_deficit=int(params.get("deficit", 2)),
            seed=int(params.get("seed", 0)),
        )
    raise ValueError(f"unknown problem {name!r}")
