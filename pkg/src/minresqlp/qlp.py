"""MINRES-QLP: minimum-length solutions of symmetric (singular) systems.

Extends the MINRES QR factorization of the Lanczos tridiagonal with a
trailing pair of right reflections per iteration, so the expanding factor
stays lower tridiagonal and the iterate is built from an orthonormal basis
W_k.  On rank-deficient final systems the last local solution component is
dropped, which lands on the unique minimum-length least-squares solution;
on ill-conditioned systems the orthogonal updates avoid the cancellation
MINRES suffers.

The solver runs cheap MINRES-style updates while the condition estimate
stays below ``trancond`` and transfers the basis window to QLP form when it
no longer does, or when a regularization event (tiny factor diagonal,
solution-norm truncation) occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import (EPS, ConvergenceHistory, SolveResult, SolverConfig,
                     TerminationFlag, TruncationEvent)
from .lanczos import PlainLanczos, PreconditionedLanczos, ZeroRhsError
from .operators import Preconditioner, SymmetricOperator
from .rotations import apply_left_reflection, apply_right_pair


@dataclass
class QlpFactorState:
    """Rolling scalar window of the QR + right-reflection factorization.

    After iteration k the slots hold the quantities the next iteration
    consumes: the previous left rotation, the pending super-diagonal
    entries, the provisional right-reflected diagonals, and the last three
    transformed rhs elements.
    """

    c1: float = -1.0
    s1: float = 0.0
    delta_pending: float = 0.0   # delta_{k+1}
    eps_pending: float = 0.0     # epsilon_{k+1}
    gamma4: float = 0.0          # gamma_k^(4)
    gamma5: float = 0.0          # gamma_{k-1}^(5)
    theta: float = 0.0           # theta_k (provisional)
    theta2: float = 0.0          # theta_{k-1}^(2) (final)
    eta: float = 0.0             # eta_k
    eta_prev: float = 0.0        # eta_{k-1}
    tau: float = 0.0             # tau_k
    tau_prev: float = 0.0        # tau_{k-1}
    phi: float = 0.0             # phi_k (structural QR chain)
    psi_lag: float = 0.0         # psi_{k-1}


@dataclass
class _TransferWindow:
    """What a MINRES-mode iteration retains so a later iteration can rebuild
    the last two QLP basis columns: the trailing direction vectors, the
    trailing entries of L, the provisional solution pair, and the iterate."""

    d_prev: np.ndarray
    d_curr: np.ndarray
    gamma5: float
    theta: float
    gamma4: float
    mu_km1: float
    mu_k: float
    x: np.ndarray


@dataclass
class QlpSolveState:
    """Vector window and norm estimates carried across iterations."""

    w_prev2: np.ndarray          # w_{k-2}^(3)
    w_prev: np.ndarray           # w_{k-1}^(2)
    x_partial: np.ndarray        # x_{k-3}^(2), settled part of the iterate
    x: np.ndarray
    mu3: float = 0.0             # mu_{k-3}, settled
    mu4: float = 0.0             # mu_{k-4}, settled
    chi_settled: float = 0.0     # chi_{k-3}^(2), monotone
    chi: float = 0.0
    anorm: float = 0.0
    gamma_min: float = math.inf
    kappa: float = 1.0
    omega: float = 0.0
    qlp_mode: bool = False
    window: _TransferWindow | None = None
    d_prev: np.ndarray | None = None
    d_prev2: np.ndarray | None = None


def update_norm_estimates(state: QlpSolveState, rho: float, gamma6_km2: float,
                          gamma5_km1: float, gamma4: float, tau: float,
                          k: int, breakdown_noise: bool) -> bool:
    """Fold iteration-k quantities into the running ||A||, smallest-diagonal,
    condition and ||Ax|| estimates.

    Returns whether gamma_k^(4) is treated as zero (the rank-deficiency
    signal): either it falls below eps * anorm, or the whole final column
    collapsed to breakdown noise (``breakdown_noise``), in which case the
    last rotation is a quotient of rounding errors and gamma_k^(4) carries
    no information.  A diagonal treated as zero is excluded from gamma_min,
    so the rank-deficient stop is reported through the flag instead of an
    infinite kappa.
    """
    state.anorm = max(state.anorm, rho, gamma6_km2, gamma5_km1, abs(gamma4))
    deficient = abs(gamma4) <= EPS * state.anorm or breakdown_noise
    if k >= 3:
        state.gamma_min = min(state.gamma_min, gamma6_km2)
    if k >= 2:
        state.gamma_min = min(state.gamma_min, gamma5_km1)
    if not deficient:
        state.gamma_min = min(state.gamma_min, abs(gamma4))
    if state.gamma_min > 0 and math.isfinite(state.gamma_min):
        state.kappa = max(state.kappa, state.anorm / state.gamma_min)
    state.omega = math.hypot(state.omega, tau)
    return deficient


def truncate_solution(state: QlpSolveState, mu_km2: float, mu_km1: float,
                      mu_k: float, maxxnorm: float, k: int,
                      history: ConvergenceHistory | None):
    """Candidate solution-norm update with the full truncation strategy.

    chi_k = ||[chi_{k-2}, mu_{k-1}, mu_k]||.  When the candidate exceeds
    maxxnorm, trailing window entries are zeroed one at a time (mu_k, then
    mu_{k-1}, then mu_{k-2}) until the recomputed chi fits; each zeroed
    entry regularizes one near-singular direction.  Returns the surviving
    window, the updated chi values, how many entries were zeroed, and
    whether even full truncation could not bring chi under the bound.
    """
    chi_settled_new = math.hypot(state.chi_settled, mu_km2)
    chi = math.sqrt(chi_settled_new**2 + mu_km1**2 + mu_k**2)
    zeroed = 0
    exhausted = False
    if chi > maxxnorm:
        chi_before = chi
        mu_k = 0.0
        zeroed = 1
        chi = math.hypot(chi_settled_new, mu_km1)
        if chi > maxxnorm:
            mu_km1 = 0.0
            zeroed = 2
            chi = chi_settled_new
        if chi > maxxnorm:
            mu_km2 = 0.0
            zeroed = 3
            chi_settled_new = state.chi_settled
            chi = state.chi_settled
        if chi > maxxnorm:
            exhausted = True
        if history is not None:
            history.truncations.append(
                TruncationEvent(k=k, chi_before=chi_before, chi_after=chi,
                                zeroed=zeroed))
    state.chi_settled = chi_settled_new
    state.chi = chi
    return mu_km2, mu_km1, mu_k, zeroed, exhausted


def transfer_minres_to_qlp(state: QlpSolveState) -> None:
    """Rebuild the trailing QLP basis columns from the retained MINRES data.

    With D L = W, the two live columns are
    w_{k-1} = gamma_{k-1}^(5) d_{k-1} + theta_k d_k and
    w_k = gamma_k^(4) d_k, and the settled part of the iterate is
    x^(2) = x^M - mu_{k-1} w_{k-1} - mu_k w_k.  (The fully settled column
    w_{k-2} is already folded into x^(2) and never needed explicitly.)
    """
    win = state.window
    assert win is not None, "transfer requires a retained MINRES window"
    state.w_prev2 = win.gamma5 * win.d_prev + win.theta * win.d_curr
    state.w_prev = win.gamma4 * win.d_curr
    state.x_partial = win.x - win.mu_km1 * state.w_prev2 - win.mu_k * state.w_prev
    state.qlp_mode = True


def minresqlp_solve(op: SymmetricOperator, b: np.ndarray,
                    config: SolverConfig | None = None,
                    precond: Preconditioner | None = None,
                    record_history: bool = False,
                    record_vectors: bool = False) -> SolveResult:
    """Run MINRES-QLP on (A - shift*I) x ~ b, optionally preconditioned.

    Without a preconditioner the result is the minimum-length least-squares
    solution (up to the stopping tolerances).  With an SPD preconditioner
    supplied as a solve callback, x still solves the original system but
    minimality and all reported norm estimates refer to the preconditioned
    problem; compute ||b - Ax|| directly if the unpreconditioned residual is
    wanted.
    """
    config = config or SolverConfig()
    b = np.asarray(b, dtype=float)
    n = b.size
    history = None
    if record_history or record_vectors:
        history = ConvergenceHistory(record_vectors=record_vectors)

    try:
        if precond is None:
            lan = PlainLanczos(op, b, shift=config.shift,
                               local_reorth=config.local_reorth)
        else:
            lan = PreconditionedLanczos(op, precond, b, shift=config.shift)
    except ZeroRhsError:
        return SolveResult(np.zeros(n), TerminationFlag.ZERO_RHS, 0,
                           0.0, 0.0, 0.0, 0.0, 1.0, 0.0, history)

    beta1 = lan.beta1
    maxit = config.resolve_maxit(n)

    fac = QlpFactorState(phi=beta1)
    state = QlpSolveState(
        w_prev2=np.zeros(n), w_prev=np.zeros(n),
        x_partial=np.zeros(n), x=np.zeros(n),
        d_prev=np.zeros(n), d_prev2=np.zeros(n),
        qlp_mode=(config.trancond <= 1.0),
    )

    if history is not None and record_vectors and not lan.preconditioned:
        history.lanczos_vectors.append(lan.v_curr.copy())

    flag = None
    phi_report = beta1
    k = 0
    while k < maxit:
        k += 1
        vk = lan.basis_vector()
        beta_k = lan.beta_next
        alpha, beta_next = lan.step()
        rho = math.hypot(alpha, beta_next) if k == 1 else \
            math.sqrt(beta_k**2 + alpha**2 + beta_next**2)

        # left reflection: previous rotation on the new column, new rotation
        # annihilating beta_{k+1}
        phi_prev = fac.phi
        left = apply_left_reflection(fac.c1, fac.s1, fac.delta_pending,
                                     alpha, beta_next, phi_prev)
        eps_k = fac.eps_pending
        fac.eps_pending = left.eps_next
        fac.delta_pending = left.delta_next
        fac.c1, fac.s1 = left.c, left.s
        fac.psi_lag = left.psi_prev

        # right reflection pair
        right = apply_right_pair(k, fac.gamma5, eps_k, fac.theta,
                                 left.delta2, left.gamma2, fac.gamma4)

        # Lanczos breakdown with a noise-level diagonal means the reduced
        # system ends rank-deficient (incompatible b)
        noise = n * EPS * max(state.anorm, rho)
        breakdown_noise = beta_next <= noise and abs(left.gamma) <= noise
        deficient = update_norm_estimates(state, rho, right.gamma6_km2,
                                          right.gamma5_km1, right.gamma4,
                                          left.tau, k, breakdown_noise)

        # local solution window (recomputed in full each iteration)
        theta2_km2 = fac.theta2  # theta_{k-2}^(2), before overwrite
        if k > 2 and right.gamma6_km2 != 0.0:
            mu_km2 = (fac.tau_prev - fac.eta_prev * state.mu4
                      - theta2_km2 * state.mu3) / right.gamma6_km2
        else:
            mu_km2 = 0.0
        if k > 1 and right.gamma5_km1 != 0.0:
            mu_km1 = (fac.tau - fac.eta * state.mu3
                      - right.theta2_km1 * mu_km2) / right.gamma5_km1
        else:
            mu_km1 = 0.0
        if not deficient:
            mu_k = (left.tau - right.eta * mu_km2
                    - right.theta * mu_km1) / right.gamma4
        else:
            mu_k = 0.0

        mu_km2, mu_km1, mu_k, zeroed, exhausted = truncate_solution(
            state, mu_km2, mu_km1, mu_k, config.maxxnorm, k, history)

        event = deficient or zeroed > 0
        use_qlp = state.qlp_mode or state.kappa >= config.trancond or event
        if use_qlp:
            if not state.qlp_mode and k > 1:
                transfer_minres_to_qlp(state)
                if history is not None:
                    history.transfer_k = k
            state.qlp_mode = True
            w_tmp = right.s2 * state.w_prev2 - right.c2 * vk
            w_km2 = right.c2 * state.w_prev2 + right.s2 * vk
            w_km1 = right.c3 * state.w_prev + right.s3 * w_tmp
            w_k = right.s3 * state.w_prev - right.c3 * w_tmp
            state.x_partial = state.x_partial + mu_km2 * w_km2
            state.x = state.x_partial + mu_km1 * w_km1 + mu_k * w_k
            state.w_prev2, state.w_prev = w_km1, w_k
            mode = "Q"
        else:
            d_new = (vk - left.delta2 * state.d_prev
                     - eps_k * state.d_prev2) / left.gamma2
            state.x = state.x + left.tau * d_new
            state.window = _TransferWindow(
                d_prev=state.d_prev, d_curr=d_new,
                gamma5=right.gamma5_km1, theta=right.theta,
                gamma4=right.gamma4, mu_km1=mu_km1, mu_k=mu_k,
                x=state.x.copy())
            state.d_prev2, state.d_prev = state.d_prev, d_new
            mode = "M"

        # a rank-deficient step leaves the residual where it was
        phi_report = phi_prev if deficient else left.phi
        fac.phi = left.phi

        if history is not None:
            history.append_scalars(k, phi_report, fac.psi_lag, state.chi,
                                   state.anorm, state.kappa, state.omega, mode)
            history.alphas.append(alpha)
            history.betas.append(beta_next)
            history.taus.append(left.tau)
            history.left_rotations.append((left.c, left.s))
            history.right_rotations.append(
                (right.c2, right.s2, right.applied2,
                 right.c3, right.s3, right.applied3))
            if record_vectors:
                if not lan.preconditioned:
                    history.lanczos_vectors.append(lan.v_curr.copy())
                history.iterates.append(state.x.copy())

        # ordered termination tests
        if phi_report <= config.tol * (state.anorm * state.chi + beta1):
            flag = TerminationFlag.RTOL_RESIDUAL
        elif phi_prev > 0 and fac.psi_lag <= config.tol * state.anorm * phi_prev:
            flag = TerminationFlag.RTOL_ARESIDUAL
        elif beta_next <= n * state.anorm * EPS:
            flag = TerminationFlag.BETA_ZERO
        elif zeroed > 0 or exhausted:
            flag = TerminationFlag.MAXXNORM
        elif state.kappa >= config.maxcond or deficient:
            flag = TerminationFlag.MAXCOND
        elif k >= maxit:
            flag = TerminationFlag.MAXIT

        # roll the scalar window
        fac.tau_prev = fac.tau
        fac.tau = left.tau
        fac.eta_prev = fac.eta
        fac.eta = right.eta
        fac.gamma5 = right.gamma5_km1
        fac.gamma4 = right.gamma4
        fac.theta = right.theta
        fac.theta2 = right.theta2_km1
        state.mu4 = state.mu3
        state.mu3 = mu_km2

        if flag is not None:
            break

    assert flag is not None
    return SolveResult(state.x, flag, k, phi_report, fac.psi_lag, state.chi,
                       state.anorm, state.kappa, state.omega, history)


def residual_recurrence(b: np.ndarray,
                        history: ConvergenceHistory) -> list[np.ndarray]:
    """Test-mode reconstruction of the residual sequence from the rotation
    log: r_k = s_k^2 r_{k-1} - phi_k c_k v_{k+1} (valid while the reduced
    system has full rank).  Requires a history recorded with vectors."""
    if not history.record_vectors or not history.lanczos_vectors:
        raise ValueError("history must be recorded with record_vectors=True")
    rs = []
    r = np.asarray(b, dtype=float)
    phi = float(np.linalg.norm(b))
    for i, (c, s) in enumerate(history.left_rotations):
        phi = phi * s  # structural QR chain, independent of any rollback
        v_next = history.lanczos_vectors[i + 1]
        r = s * s * r - phi * c * v_next
        rs.append(r)
    return rs
