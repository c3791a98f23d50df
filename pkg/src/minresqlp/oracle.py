"""Dense reference solvers: eigendecomposition, truncated-EVD solves,
pseudoinverse (minimum-length) solutions, condition numbers.

These are the ground truth the iterative solvers are verified against, so
they deliberately share no code with them: Householder tridiagonalization
followed by implicit-shift QL, dense and O(n^3), capped at n = 2000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import EPS
from .operators import DenseSymmetricMatrix

MAX_ORACLE_DIM = 2000


@dataclass(frozen=True)
class EigenDecomposition:
    """A = U diag(eigenvalues) U' with orthonormal columns in U,
    eigenvalues ascending."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def anorm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    def nonzero_mask(self, t: float) -> np.ndarray:
        """Eigenvalues kept by the truncation cutoff |lambda| > t*||A||*eps."""
        return np.abs(self.eigenvalues) > t * self.anorm * EPS

    def range_projector(self, t: float = 1.0) -> np.ndarray:
        u1 = self.vectors[:, self.nonzero_mask(t)]
        return u1 @ u1.T

    def null_projector(self, t: float = 1.0) -> np.ndarray:
        u2 = self.vectors[:, ~self.nonzero_mask(t)]
        return u2 @ u2.T


def _as_array(a) -> np.ndarray:
    if isinstance(a, DenseSymmetricMatrix):
        return a.array
    return np.asarray(a, dtype=float)


def _householder_tridiagonalize(a: np.ndarray):
    """Reduce symmetric a to tridiagonal (d, e) by Householder similarity,
    accumulating the orthogonal transformation Z (a = Z T Z')."""
    A = a.copy()
    n = A.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i  # reduce row i against columns 0..l-1
        if l > 1:
            scale = float(np.sum(np.abs(A[i, :l])))
            if scale == 0.0:
                e[i] = A[i, l - 1]
                d[i] = 0.0
                continue
            u = A[i, :l] / scale
            h = float(u @ u)
            f = u[l - 1]
            g = -math.copysign(math.sqrt(h), f) if f != 0 else -math.sqrt(h)
            e[i] = scale * g
            h -= f * g
            u[l - 1] = f - g
            A[i, :l] = u
            p = A[:l, :l] @ u / h
            kk = float(p @ u) / (2.0 * h)
            q = p - kk * u
            A[:l, :l] -= np.outer(q, u) + np.outer(u, q)
            d[i] = h
        else:
            e[i] = A[i, 0]
            d[i] = 0.0
    d[0] = 0.0
    # accumulate the transformation
    z = np.eye(n)
    for i in range(1, n):
        l = i
        if d[i] != 0.0:
            u = A[i, :l]
            # apply I - u u'/h to the leading block of z
            g = u @ z[:l, :l]
            z[:l, :l] -= np.outer(u, g) / d[i]
        d[i] = A[i, i]
    d[0] = A[0, 0]
    return d, e, z


def _tridiag_ql(d: np.ndarray, e: np.ndarray, z: np.ndarray, max_sweeps=50):
    """Implicit-shift QL on the tridiagonal (d, e[1:]), rotations applied to
    the columns of z.  Mutates and returns (d, z)."""
    n = d.size
    e = np.roll(e, -1)  # e[i] pairs d[i], d[i+1]; e[n-1] unused
    e[n - 1] = 0.0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise RuntimeError(f"QL failed to converge at index {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zp = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zp
                z[:, i] = c * z[:, i] - s * zp
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def eigendecomposition(a) -> EigenDecomposition:
    """Full symmetric eigendecomposition, eigenvalues ascending."""
    A = _as_array(a)
    n = A.shape[0]
    if n > MAX_ORACLE_DIM:
        raise ValueError(f"oracle is capped at n = {MAX_ORACLE_DIM}, got {n}")
    if n == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(A)))):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    if n == 1:
        return EigenDecomposition(A[0, 0:1].copy(), np.ones((1, 1)))
    d, e, z = _householder_tridiagonalize(A)
    d, z = _tridiag_ql(d, e, z)
    order = np.argsort(d)
    return EigenDecomposition(d[order], z[:, order])


def tevd_solve(a, b: np.ndarray, t: float = 1.0,
               evd: EigenDecomposition | None = None) -> np.ndarray:
    """Truncated-EVD solution: sum (1/lambda_i) u_i u_i' b over eigenvalues
    with |lambda_i| > t*||A||*eps.  t = 0 keeps every nonzero eigenvalue."""
    if t < 0:
        raise ValueError("t must be >= 0")
    evd = evd or eigendecomposition(a)
    b = np.asarray(b, dtype=float)
    if t == 0.0:
        keep = evd.eigenvalues != 0.0
    else:
        keep = evd.nonzero_mask(t)
    u = evd.vectors[:, keep]
    lam = evd.eigenvalues[keep]
    return u @ ((u.T @ b) / lam) if lam.size else np.zeros_like(b)


def pseudoinverse_solution(a, b: np.ndarray,
                           evd: EigenDecomposition | None = None) -> np.ndarray:
    """Unique minimum-length least-squares solution of Ax ~ b for symmetric A.

    Uses the eigenvalue cutoff |lambda| > n*||A||*eps, i.e. the TEVD solve
    with t = n for safety against rounding-level eigenvalues.
    """
    evd = evd or eigendecomposition(a)
    n = evd.eigenvalues.size
    return tevd_solve(a, b, t=float(n), evd=evd)


def optimal_residual_norm(a, b: np.ndarray,
                          evd: EigenDecomposition | None = None) -> float:
    """min_x ||Ax - b|| = norm of the projection of b onto null(A)."""
    evd = evd or eigendecomposition(a)
    n = evd.eigenvalues.size
    u2 = evd.vectors[:, ~evd.nonzero_mask(float(n))]
    return float(np.linalg.norm(u2.T @ np.asarray(b, dtype=float)))


def condition_number(a, t: float = 1.0,
                     evd: EigenDecomposition | None = None) -> float:
    """max|lambda| over the smallest eigenvalue magnitude above the
    t*||A||*eps cutoff."""
    evd = evd or eigendecomposition(a)
    anorm = evd.anorm
    if anorm == 0.0:
        raise ValueError("condition number of the zero matrix is undefined")
    keep = np.abs(evd.eigenvalues) > t * anorm * EPS
    lam = np.abs(evd.eigenvalues[keep])
    return float(anorm / np.min(lam))
