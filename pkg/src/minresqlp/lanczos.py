"""One-step Lanczos iterators for A - sigma*I, plain and preconditioned.

The production iterators keep only the rolling two- or three-vector window.
``tridiagonalize`` accumulates the full basis (optionally reorthogonalized)
and exists for the test suite, where exact-arithmetic behaviour such as
breakdown at the grade of b needs to be observable.
"""

from __future__ import annotations

import numpy as np

from .common import EPS
from .operators import (IndefinitePreconditionerError, Preconditioner,
                        SymmetricOperator)


class ZeroRhsError(ValueError):
    """b = 0: callers should return x = 0 with the zero-rhs flag instead."""


class PlainLanczos:
    """v-form iterator: p = A v_k - sigma v_k - beta_k v_{k-1}, then
    alpha_k = v_k' p and beta_{k+1} v_{k+1} = p - alpha_k v_k.

    After ``step`` the state exposes alpha (alpha_k), beta (beta_k),
    beta_next (beta_{k+1}), v_prev (v_k, the vector alpha belongs to) and
    v_curr (v_{k+1}, zeros on breakdown).
    """

    preconditioned = False

    def __init__(self, op: SymmetricOperator, b: np.ndarray,
                 shift: float = 0.0, local_reorth: bool = False):
        b = np.asarray(b, dtype=float)
        beta1 = float(np.linalg.norm(b))
        if beta1 == 0.0:
            raise ZeroRhsError("right-hand side is zero")
        self.op = op
        self.shift = float(shift)
        self.local_reorth = bool(local_reorth)
        self.k = 0
        self.beta1 = beta1
        self.v_prev = np.zeros_like(b)
        self.v_curr = b / beta1
        self.alpha = 0.0
        self.beta = beta1
        self.beta_next = beta1

    def basis_vector(self) -> np.ndarray:
        """The direction multiplying the new tridiagonal column in x-space."""
        return self.v_curr

    def step(self):
        self.k += 1
        v = self.v_curr
        beta_k = self.beta_next  # subdiagonal pairing v_{k-1} and v_k
        p = self.op.apply(v)
        if self.shift != 0.0:
            p = p - self.shift * v
        if self.k > 1:
            p -= beta_k * self.v_prev
        alpha = float(v @ p)
        p -= alpha * v
        if self.k == 1 and self.local_reorth:
            p -= (v @ p) * v
        beta_next = float(np.linalg.norm(p))
        self.alpha = alpha
        self.beta = beta_k
        self.v_prev = v
        self.v_curr = p / beta_next if beta_next > 0.0 else np.zeros_like(p)
        self.beta_next = beta_next
        return alpha, beta_next


class PreconditionedLanczos:
    """z/q-form iterator working entirely through solves M q = z.

    beta_k = sqrt(q_k' z_k) is well defined for positive-definite M; a
    negative product beyond rounding raises IndefinitePreconditionerError.
    The x-space direction for iteration k is q_k / beta_k.
    """

    preconditioned = True

    def __init__(self, op: SymmetricOperator, precond: Preconditioner,
                 b: np.ndarray, shift: float = 0.0):
        b = np.asarray(b, dtype=float)
        if float(np.linalg.norm(b)) == 0.0:
            raise ZeroRhsError("right-hand side is zero")
        self.op = op
        self.precond = precond
        self.shift = float(shift)
        z1 = b.copy()
        q1 = precond.solve(z1)
        beta1 = self._beta(q1, z1)
        if beta1 == 0.0:
            # M is SPD, so q'z = 0 forces z = 0, i.e. b = 0 handled above;
            # treat a rounding-level zero as a zero rhs as well.
            raise ZeroRhsError("preconditioned right-hand side is zero")
        self.k = 0
        self.beta1 = beta1
        self.z_prev = np.zeros_like(b)
        self.z_curr = z1
        self.q_prev = np.zeros_like(b)
        self.q_curr = q1
        self.alpha = 0.0
        self.beta = beta1
        self.beta_next = beta1
        self._beta_prevprev = 1.0  # beta_{k-1} placeholder for the k=1 step

    @staticmethod
    def _beta(q, z):
        t = float(q @ z)
        if t < 0.0:
            scale = float(np.linalg.norm(q) * np.linalg.norm(z))
            if t < -4.0 * EPS * scale:
                raise IndefinitePreconditionerError(
                    f"q'z = {t:.3e} < 0: preconditioner is not positive definite")
            t = 0.0
        return float(np.sqrt(t))

    def basis_vector(self) -> np.ndarray:
        return self.q_curr / self.beta_next if self.beta_next > 0 else \
            np.zeros_like(self.q_curr)

    def step(self):
        self.k += 1
        # on entry q_curr = q_k, z_curr = z_k, beta_next = beta_k
        q_k = self.q_curr
        z_k = self.z_curr
        if self.k == 1:
            beta_k = self.beta1
            beta_km1 = 1.0  # multiplies z_0 = 0
        else:
            beta_km1 = self.beta
            beta_k = self.beta_next
        p = self.op.apply(q_k)
        if self.shift != 0.0:
            p = p - self.shift * q_k
        alpha = float(q_k @ p) / beta_k**2
        z_next = p / beta_k - (alpha / beta_k) * z_k
        if self.k > 1:
            z_next -= (beta_k / beta_km1) * self.z_prev
        q_next = self.precond.solve(z_next)
        beta_next = self._beta(q_next, z_next)
        self.alpha = alpha
        self.beta = beta_k
        self.z_prev = z_k
        self.z_curr = z_next
        self.q_prev = q_k
        self.q_curr = q_next
        self.beta_next = beta_next
        return alpha, beta_next


def tridiagonalize(op: SymmetricOperator, b: np.ndarray, max_steps: int,
                   shift: float = 0.0, reorthogonalize: bool = False,
                   breakdown_rtol: float | None = None):
    """Test-mode Lanczos: run up to max_steps, accumulating the full basis.

    Returns (alphas, betas, V): alphas has one entry per step, betas[i] is
    the subdiagonal beta_{i+2} produced by step i+1 (0.0 on breakdown), and
    V holds the unit basis vectors as columns.  Breakdown is declared when
    beta falls below ``breakdown_rtol`` (default: n*eps) relative to the
    running norm estimate; reorthogonalized callers probing exact-arithmetic
    breakdown should pass something looser like 1e-10.  Full
    reorthogonalization keeps the exact-arithmetic picture: breakdown then
    happens at the grade of b.
    """
    b = np.asarray(b, dtype=float)
    beta1 = float(np.linalg.norm(b))
    if beta1 == 0.0:
        raise ZeroRhsError("right-hand side is zero")
    vs = [b / beta1]
    alphas: list[float] = []
    betas: list[float] = []
    anorm = 0.0
    for k in range(1, max_steps + 1):
        v = vs[-1]
        p = op.apply(v)
        if shift != 0.0:
            p = p - shift * v
        if k > 1:
            p -= betas[-1] * vs[-2]
        alpha = float(v @ p)
        p -= alpha * v
        if reorthogonalize:
            basis = np.column_stack(vs)
            for _ in range(2):
                p -= basis @ (basis.T @ p)
        beta_next = float(np.linalg.norm(p))
        alphas.append(alpha)
        anorm = max(anorm, abs(alpha) + (betas[-1] if betas else 0.0) + beta_next)
        rtol = breakdown_rtol if breakdown_rtol is not None else \
            max(len(b), 10) * EPS
        if beta_next <= rtol * max(anorm, np.finfo(float).tiny):
            betas.append(0.0)
            break
        betas.append(beta_next)
        vs.append(p / beta_next)
    return np.array(alphas), np.array(betas), np.column_stack(vs)
