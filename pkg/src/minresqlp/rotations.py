"""Stable 2x2 reflection kernel and the scalar updates it drives.

The solvers reduce the expanding Lanczos tridiagonal with one left
reflection per iteration (QR) and, for the QLP variant, a trailing pair of
right reflections that push the triangle below the diagonal.  Everything
here is pure scalar arithmetic; the vector updates live with the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


@dataclass(frozen=True)
class Reflection:
    """A 2x2 reflection [[c, s], [s, -c]] with r = sqrt(a^2 + b^2) >= 0."""

    c: float
    s: float
    r: float


def sym_ortho(a: float, b: float) -> Reflection:
    """Construct the reflection annihilating b against a without overflow.

    Conventions for the degenerate inputs:

    * ``(0, 0) -> (1, 0, 0)`` so downstream divisions stay guarded,
    * ``b = 0 -> (sign(a), 0, |a|)`` with ``sign(0) = 1``,
    * ``a = 0 -> (0, sign(b), |b|)``.

    r is finite for |a|, |b| up to about sqrt(max float)/2.
    """
    if b == 0.0:
        if a == 0.0:
            return Reflection(1.0, 0.0, 0.0)
        return Reflection(math.copysign(1.0, a), 0.0, abs(a))
    if a == 0.0:
        return Reflection(0.0, math.copysign(1.0, b), abs(b))
    if abs(b) > abs(a):
        t = a / b
        s = math.copysign(1.0, b) / math.sqrt(1.0 + t * t)
        c = s * t
        r = b / s
    else:
        t = b / a
        c = math.copysign(1.0, a) / math.sqrt(1.0 + t * t)
        s = c * t
        r = a / c
    return Reflection(c, s, r)


class LeftStep(NamedTuple):
    """Scalars produced by one left-reflection step at iteration k."""

    delta2: float      # delta_k^(2), settled super-diagonal entry of R
    gamma: float       # gamma_k before the current rotation
    eps_next: float    # epsilon_{k+1}, second super-diagonal entry
    delta_next: float  # delta_{k+1}, pending for the next iteration
    c: float           # current rotation cosine
    s: float           # current rotation sine (>= 0 while beta_next > 0)
    gamma2: float      # gamma_k^(2) = ||[gamma_k, beta_{k+1}]||
    tau: float         # tau_k, last transformed rhs element
    phi: float         # phi_k = phi_{k-1} * s_k, residual norm estimate
    psi_prev: float    # psi_{k-1} = phi_{k-1} * ||[gamma_k, delta_{k+1}]||


def apply_left_reflection(c_prev: float, s_prev: float, delta: float,
                          alpha: float, beta_next: float,
                          phi_prev: float) -> LeftStep:
    """Finish the previous left reflection on the new tridiagonal column and
    generate the current one from (gamma_k, beta_{k+1}).

    Takes (c_prev, s_prev) from iteration k-1 (seeded with (-1, 0) at k=1),
    the pending super-diagonal entry delta_k, and the new Lanczos scalars.
    phi_prev must be >= 0; since beta_next >= 0 the new sine is >= 0 and the
    residual estimate phi_k = phi_{k-1} s_k stays nonnegative.
    """
    delta2 = c_prev * delta + s_prev * alpha
    gamma = s_prev * delta - c_prev * alpha
    eps_next = s_prev * beta_next
    delta_next = -c_prev * beta_next
    refl = sym_ortho(gamma, beta_next)
    tau = refl.c * phi_prev
    phi = refl.s * phi_prev
    psi_prev = phi_prev * math.hypot(gamma, delta_next)
    return LeftStep(delta2, gamma, eps_next, delta_next,
                    refl.c, refl.s, refl.r, tau, phi, psi_prev)


class RightPair(NamedTuple):
    """Scalars produced by the right reflection pair P_{k-2,k}, P_{k-1,k}."""

    c2: float
    s2: float
    applied2: bool     # False while k < 3 (P_{k-2,k} does not exist yet)
    gamma6_km2: float  # gamma_{k-2}^(6), final diagonal entry of L
    theta2_km1: float  # theta_{k-1}^(2), final first-subdiagonal entry
    eta: float         # eta_k, second-subdiagonal entry of L
    delta3: float      # delta_k^(3), input to the second reflection
    c3: float
    s3: float
    applied3: bool     # False at k = 1 (P_{k-1,k} does not exist yet)
    gamma5_km1: float  # gamma_{k-1}^(5), next-to-last diagonal of L
    theta: float       # theta_k, provisional subdiagonal entry
    gamma4: float      # gamma_k^(4), provisional last diagonal of L


def apply_right_pair(k: int, gamma5_km2: float, eps: float, theta_km1: float,
                     delta2: float, gamma2: float,
                     gamma4_km1: float) -> RightPair:
    """Apply the trailing right reflection pair to the QR scalars of step k.

    The first reflection mixes columns (k-2, k) and annihilates eps_k,
    finalizing the L diagonal gamma_{k-2}^(6); the second mixes (k-1, k) and
    annihilates delta_k^(3), finalizing gamma_{k-1}^(5).  For k < 3 (resp.
    k < 2) the corresponding reflection does not exist; the fixed pair
    (c, s) = (-1, 0) is substituted so that the shared update formulas pass
    values through with their signs preserved.

    The sign of the produced diagonals follows sym_ortho; callers needing
    magnitudes take abs(gamma4).
    """
    if k >= 3:
        r2 = sym_ortho(gamma5_km2, eps)
        c2, s2, applied2 = r2.c, r2.s, True
        gamma6_km2 = r2.r
    else:
        c2, s2, applied2 = -1.0, 0.0, False
        gamma6_km2 = -gamma5_km2  # seed values are zero here

    delta3 = s2 * theta_km1 - c2 * delta2
    theta2_km1 = c2 * theta_km1 + s2 * delta2
    gamma3 = -c2 * gamma2
    eta = s2 * gamma2

    if k >= 2:
        r3 = sym_ortho(gamma4_km1, delta3)
        c3, s3, applied3 = r3.c, r3.s, True
        gamma5_km1 = r3.r
    else:
        c3, s3, applied3 = -1.0, 0.0, False
        gamma5_km1 = -gamma4_km1

    theta = s3 * gamma3
    gamma4 = -c3 * gamma3
    return RightPair(c2, s2, applied2, gamma6_km2, theta2_km1, eta, delta3,
                     c3, s3, applied3, gamma5_km1, theta, gamma4)
