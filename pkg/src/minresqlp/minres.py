"""Classic MINRES with residual, Ar and Ax norm recurrences.

Solves (A - sigma I) x ~ b for symmetric A by minimizing the residual over
the expanding Krylov subspace, via a QR factorization of the Lanczos
tridiagonal updated one reflection per iteration.  On singular compatible
systems the final iterate is the minimum-length solution; on incompatible
systems the ||Ar|| stopping test certifies a least-squares solution, which
in general is *not* minimum-length (see the QLP variant for that).
"""

from __future__ import annotations

import math

import numpy as np

from .common import (EPS, ConvergenceHistory, SolveResult, SolverConfig,
                     TerminationFlag)
from .lanczos import PlainLanczos, ZeroRhsError
from .operators import SymmetricOperator
from .rotations import apply_left_reflection


def minres_norm_recurrences(phi_prev: float, s: float, gamma_next: float,
                            delta_next2: float, omega_prev: float,
                            tau: float) -> tuple[float, float, float]:
    """One step of the norm recurrences.

    phi_k = phi_{k-1} s_k, psi_k = phi_k ||[gamma_{k+1}, delta_{k+2}]||
    (delta_{k+2} = 0 at the final step), omega_k^2 = omega_{k-1}^2 + tau_k^2.
    """
    phi = phi_prev * s
    psi = phi * math.hypot(gamma_next, delta_next2)
    omega = math.hypot(omega_prev, tau)
    return phi, psi, omega


def minres_solve(op: SymmetricOperator, b: np.ndarray,
                 config: SolverConfig | None = None,
                 record_history: bool = False,
                 record_vectors: bool = False) -> SolveResult:
    """Run MINRES on (A - shift*I) x ~ b.

    Stops on the NRBE residual tests, Lanczos breakdown, maxit, maxcond, or
    when the directly computed ||x_k|| would exceed maxxnorm (the iterate is
    then left at x_{k-1}).  If the final reduced system is singular, the last
    solution component is dropped and the previous iterate returned.
    """
    config = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    n = b.size
    history = None
    if record_history or record_vectors:
        history = ConvergenceHistory(record_vectors=record_vectors)

    try:
        lan = PlainLanczos(op, b, shift=config.shift,
                           local_reorth=config.local_reorth)
    except ZeroRhsError:
        return SolveResult(np.zeros(n), TerminationFlag.ZERO_RHS, 0,
                           0.0, 0.0, 0.0, 0.0, 1.0, 0.0, history)

    beta1 = lan.beta1
    maxit = config.resolve_maxit(n)

    x = np.zeros(n)
    d_prev = np.zeros(n)
    d_prev2 = np.zeros(n)
    c_prev, s_prev = -1.0, 0.0
    delta_pending = 0.0
    eps_pending = 0.0
    phi = beta1
    psi_lag = 0.0
    omega = 0.0
    xnorm = 0.0
    anorm = 0.0
    gmin = math.inf
    kappa = 1.0

    if history is not None and record_vectors:
        history.lanczos_vectors.append(lan.v_curr.copy())

    flag = None
    k = 0
    while k < maxit:
        k += 1
        vk = lan.basis_vector()
        beta_k = lan.beta_next
        alpha, beta_next = lan.step()
        rho = math.hypot(alpha, beta_next) if k == 1 else \
            math.sqrt(beta_k**2 + alpha**2 + beta_next**2)

        phi_prev = phi
        step = apply_left_reflection(c_prev, s_prev, delta_pending, alpha,
                                     beta_next, phi_prev)
        eps_k = eps_pending
        eps_pending = step.eps_next
        delta_pending = step.delta_next
        c_prev, s_prev = step.c, step.s
        psi_lag = step.psi_prev
        anorm = max(anorm, rho)

        # final reduced system singular: gamma and beta both at noise level,
        # or the rotated diagonal below the treat-as-zero threshold
        noise = n * EPS * anorm
        deficient = step.gamma2 <= EPS * anorm or \
            (beta_next <= noise and abs(step.gamma) <= noise)
        hit_maxxnorm = False
        if not deficient:
            d_new = (vk - step.delta2 * d_prev - eps_k * d_prev2) / step.gamma2
            x_new = x + step.tau * d_new
            xnorm_new = float(np.linalg.norm(x_new))
            if xnorm_new >= config.maxxnorm:
                hit_maxxnorm = True
            else:
                x = x_new
                xnorm = xnorm_new
                d_prev2, d_prev = d_prev, d_new
                phi = step.phi
                omega = math.hypot(omega, step.tau)
                gmin = min(gmin, step.gamma2)
                if gmin > 0:
                    kappa = max(kappa, anorm / gmin)

        if history is not None:
            history.append_scalars(k, phi, psi_lag, xnorm, anorm, kappa,
                                   omega, "M")
            history.alphas.append(alpha)
            history.betas.append(beta_next)
            history.taus.append(step.tau)
            history.left_rotations.append((step.c, step.s))
            if record_vectors:
                history.lanczos_vectors.append(lan.v_curr.copy())
                history.iterates.append(x.copy())

        # ordered termination tests
        if phi <= config.tol * (anorm * xnorm + beta1):
            flag = TerminationFlag.RTOL_RESIDUAL
        elif phi_prev > 0 and psi_lag <= config.tol * anorm * phi_prev:
            flag = TerminationFlag.RTOL_ARESIDUAL
        elif beta_next <= n * anorm * EPS:
            flag = TerminationFlag.BETA_ZERO
        elif hit_maxxnorm:
            flag = TerminationFlag.MAXXNORM
        elif kappa >= config.maxcond or deficient:
            flag = TerminationFlag.MAXCOND
        elif k >= maxit:
            flag = TerminationFlag.MAXIT
        if flag is not None:
            break

    assert flag is not None
    return SolveResult(x, flag, k, phi, psi_lag, xnorm, anorm, kappa, omega,
                       history)
