"""Preconditioner constructors and compatible-system reformulations.

Diagonal scalings treat the problem as DADy = Db with x = Dy, which is the
two-sided preconditioned solve with M = D^{-2}; M^(1/2) is never formed.
The block reformulations embed a singular least-squares problem into a
larger *compatible* symmetric system whose solution contains the wanted x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (DenseSymmetricMatrix, DiagonalPreconditioner,
                        Preconditioner, SymmetricOperator)

#: Row-norm convergence tolerance and sweep cap for binormalization.
BINORM_TOL = 1e-2
BINORM_MAX_SWEEPS = 50


@dataclass(frozen=True)
class DiagonalScaling:
    """Positive diagonal D used as a symmetric congruence A -> DAD.

    ``delta`` records the safeguard parameter when the scaling came from the
    entry-based formula; binormalization leaves it None.
    """

    d: np.ndarray
    delta: float | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if np.any(d <= 0) or not np.all(np.isfinite(d)):
            raise ValueError("scaling entries must be positive and finite")
        object.__setattr__(self, "d", d)

    def scaled_matrix(self, a: DenseSymmetricMatrix) -> DenseSymmetricMatrix:
        """DAD as an explicit matrix."""
        return DenseSymmetricMatrix(self.d[:, None] * a.array * self.d[None, :])

    def preconditioner(self) -> Preconditioner:
        """The equivalent solve callback: M = D^{-2}, so q = D^2 z."""
        return DiagonalPreconditioner(1.0 / self.d**2)

    def recover(self, y: np.ndarray) -> np.ndarray:
        """Map a solution of DADy = Db back to x = Dy."""
        return self.d * np.asarray(y, dtype=float)


def diag_scaling(a: DenseSymmetricMatrix, delta: float) -> DiagonalScaling:
    """Entry-based safeguarded scaling:
    d_j = 1 / max(delta, sqrt|A_jj|, max_{i != j} |A_ij|)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    m = np.abs(a.array).copy()
    diag = np.sqrt(np.diag(m))
    np.fill_diagonal(m, -np.inf)
    off_max = np.max(m, axis=0) if a.n > 1 else np.zeros(a.n)
    d = 1.0 / np.maximum(delta, np.maximum(diag, off_max))
    return DiagonalScaling(d, delta=float(delta))


def binormalize(a: DenseSymmetricMatrix, sweeps: int = 2,
                tol: float = BINORM_TOL) -> DiagonalScaling:
    """Scale toward unit row/column 2-norms of DAD.

    Each sweep is a Gauss-Seidel pass: with B = A o A and x = d^2, row j of
    DAD has squared norm x_j (B x)_j, and the update solves
    B_jj x_j^2 + (sum_{i != j} B_ji x_i) x_j = 1 for x_j (stable quadratic
    form).  Rows that are identically zero keep d_j = 1.  Stops early once
    every row norm of DAD lies within ``tol`` of 1.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    B = a.array**2
    n = a.n
    x = np.ones(n)
    for _ in range(min(sweeps, BINORM_MAX_SWEEPS)):
        for j in range(n):
            bjj = B[j, j]
            beta = float(B[j] @ x) - bjj * x[j]
            if bjj == 0.0 and beta == 0.0:
                x[j] = 1.0  # zero row: leave unscaled
            elif bjj == 0.0:
                x[j] = 1.0 / beta
            else:
                x[j] = 2.0 / (beta + np.sqrt(beta**2 + 4.0 * bjj))
        row_norms = np.sqrt(x * (B @ x))
        if np.all(np.abs(row_norms[row_norms > 0] - 1.0) <= tol):
            break
    return DiagonalScaling(np.sqrt(x))


LAYOUTS = ("augmented", "kkt", "normal_reg", "two_layer", "kkt_reg")


class AugmentedOperator(SymmetricOperator):
    """Symmetric block operator over a base operator; matrix-free."""

    def __init__(self, base: SymmetricOperator, layout: str, delta: float):
        if layout not in LAYOUTS:
            raise ValueError(f"unknown layout {layout!r}; expected {LAYOUTS}")
        if layout in ("normal_reg", "two_layer", "kkt_reg") and delta <= 0:
            raise ValueError(f"layout {layout!r} requires delta > 0")
        if delta < 0:
            raise ValueError("delta must be >= 0")
        factor = {"augmented": 2, "kkt": 4, "normal_reg": 1,
                  "two_layer": 2, "kkt_reg": 4}[layout]
        super().__init__(factor * base.n)
        self.base = base
        self.layout = layout
        self.delta = float(delta)

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        n = self.base.n
        A = self.base.apply
        if self.layout == "augmented":
            # [[I, A], [A, 0]]
            r, x = u[:n], u[n:]
            return np.concatenate([r + A(x), A(r)])
        if self.layout == "kkt":
            # [[0,0,I,A], [0,-I,A,0], [I,A,0,0], [A,0,0,0]]
            r, x, y, z = u[:n], u[n:2 * n], u[2 * n:3 * n], u[3 * n:]
            return np.concatenate([y + A(z), -x + A(y), r + A(x), A(r)])
        if self.layout == "normal_reg":
            # A^2 + delta^2 I
            return A(A(u)) + self.delta**2 * u
        if self.layout == "two_layer":
            # [[I, A^2], [A^2, -delta^2 A^2]]
            x, v = u[:n], u[n:]
            a2v = A(A(v))
            a2x = A(A(x))
            return np.concatenate([x + a2v, a2x - self.delta**2 * a2v])
        # kkt_reg: [[0,0,I,A], [0,-I,A,0], [I,A,delta^2 I,0], [A,0,0,0]]
        r, x, y, v = u[:n], u[n:2 * n], u[2 * n:3 * n], u[3 * n:]
        return np.concatenate([y + A(v), -x + A(y),
                               r + A(x) + self.delta**2 * y, A(r)])


def build_reformulation(op: SymmetricOperator, b: np.ndarray, layout: str,
                        delta: float = 0.0):
    """Wrap (op, b) into the equivalent compatible block system.

    Returns (block_operator, block_rhs, extract) where ``extract`` pulls the
    x block out of the solved stacked vector.  Layouts:

    * ``augmented``:  [[I, A], [A, 0]] [r; x] = [b; 0]; r unique, x not
      necessarily minimum-length.
    * ``kkt``:        4n saddle system whose x block is the minimum-length
      solution.
    * ``normal_reg``: (A^2 + delta^2 I) x = Ab, the regularized normal
      equation.
    * ``two_layer``:  [[I, A^2], [A^2, -delta^2 A^2]] [x; v] = [0; Ab];
      eliminating v gives normal_reg, and x -> minimum-length as delta -> 0.
    * ``kkt_reg``:    4n regularized saddle system with the same limit.
    """
    b = np.asarray(b, dtype=float)
    block = AugmentedOperator(op, layout, delta)
    n = op.n
    zeros = np.zeros(n)
    if layout == "augmented":
        rhs = np.concatenate([b, zeros])
        extract = lambda u: u[n:]
    elif layout == "kkt":
        rhs = np.concatenate([zeros, zeros, b, zeros])
        extract = lambda u: u[n:2 * n]
    elif layout == "normal_reg":
        rhs = op.apply(b)
        extract = lambda u: u
    elif layout == "two_layer":
        rhs = np.concatenate([zeros, op.apply(b)])
        extract = lambda u: u[:n]
    else:  # kkt_reg
        rhs = np.concatenate([zeros, zeros, b, zeros])
        extract = lambda u: u[n:2 * n]
    return block, rhs, extract
