"""Shared solver types: configuration, termination flags, results, history."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

EPS = float(np.finfo(np.float64).eps)


class TerminationFlag(enum.IntEnum):
    """Why a solve stopped.

    The three groups mirror the stopping rules: Lanczos breakdown / iteration
    budget, normwise relative backward error (NRBE) tests, and regularization
    limits (solution norm, condition estimate).
    """

    ZERO_RHS = 0          # b = 0, solution x = 0 returned immediately
    RTOL_RESIDUAL = 1     # ||r|| / (Anorm*||x|| + ||b||) <= tol
    RTOL_ARESIDUAL = 2    # ||Ar|| / (Anorm*||r||) <= tol
    MAXXNORM = 3          # ||x|| exceeded maxxnorm (truncation exhausted)
    MAXCOND = 4           # condition estimate exceeded maxcond, or a zero
                          # diagonal was detected in the triangular factor
    MAXIT = 5             # iteration limit reached
    BETA_ZERO = 6         # beta_{k+1} below the Lanczos breakdown threshold


#: Flags that the CLI maps to a zero ("solved") exit code.
SUCCESS_FLAGS = frozenset(
    {TerminationFlag.ZERO_RHS, TerminationFlag.RTOL_RESIDUAL,
     TerminationFlag.RTOL_ARESIDUAL, TerminationFlag.BETA_ZERO}
)


@dataclass
class SolverConfig:
    """Knobs shared by the MINRES and MINRES-QLP drivers.

    maxit defaults to 4n when left as None.  trancond controls the switch
    from MINRES-style updates to QLP-style updates: 1 forces QLP from the
    first iteration, anything above 1/eps keeps MINRES updates throughout.
    """

    tol: float = 1e-12
    maxit: int | None = None
    maxxnorm: float = 1e7
    maxcond: float = 1e15
    trancond: float = 1e7
    shift: float = 0.0
    local_reorth: bool = False

    def __post_init__(self):
        if self.tol < EPS:
            raise ValueError(f"tol must be >= machine epsilon, got {self.tol}")
        if self.maxit is not None and self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if self.trancond < 1.0:
            raise ValueError("trancond must be >= 1")

    def resolve_maxit(self, n: int) -> int:
        return self.maxit if self.maxit is not None else 4 * n


@dataclass
class TruncationEvent:
    """Record of one maxxnorm truncation: which trailing solution-window
    entries were zeroed and the norm estimate before/after."""

    k: int
    chi_before: float
    chi_after: float
    zeroed: int  # how many trailing entries of the local window were dropped


@dataclass
class ConvergenceHistory:
    """Per-iteration record of the recurred quantities.

    Scalar columns are always filled when history recording is on.  The
    vector fields (Lanczos basis, iterates, rotation log) are only populated
    in test mode (``record_vectors=True``) and exist so the test suite can
    reconstruct the dense factorizations and residuals independently.
    """

    k: list[int] = field(default_factory=list)
    phi: list[float] = field(default_factory=list)
    psi: list[float] = field(default_factory=list)       # lagged: psi_{k-1}
    chi: list[float] = field(default_factory=list)
    anorm: list[float] = field(default_factory=list)
    kappa: list[float] = field(default_factory=list)
    omega: list[float] = field(default_factory=list)
    mode: list[str] = field(default_factory=list)        # 'M' or 'Q'

    alphas: list[float] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)     # beta_{k+1}
    taus: list[float] = field(default_factory=list)
    left_rotations: list[tuple[float, float]] = field(default_factory=list)
    right_rotations: list[tuple] = field(default_factory=list)
    truncations: list[TruncationEvent] = field(default_factory=list)
    transfer_k: int | None = None

    record_vectors: bool = False
    lanczos_vectors: list[np.ndarray] = field(default_factory=list)  # v_1, v_2, ...
    iterates: list[np.ndarray] = field(default_factory=list)         # x_k snapshots

    def __len__(self):
        return len(self.k)

    def append_scalars(self, k, phi, psi, chi, anorm, kappa, omega, mode):
        self.k.append(int(k))
        self.phi.append(float(phi))
        self.psi.append(float(psi))
        self.chi.append(float(chi))
        self.anorm.append(float(anorm))
        self.kappa.append(float(kappa))
        self.omega.append(float(omega))
        self.mode.append(mode)

    def to_csv(self, path) -> None:
        """Write the scalar columns with the fixed header
        ``k,phi,psi,chi,Anorm,kappa,omega,mode``."""
        with open(path, "w") as fh:
            fh.write("k,phi,psi,chi,Anorm,kappa,omega,mode\n")
            for i in range(len(self.k)):
                fh.write(
                    f"{self.k[i]},{self.phi[i]:.17g},{self.psi[i]:.17g},"
                    f"{self.chi[i]:.17g},{self.anorm[i]:.17g},"
                    f"{self.kappa[i]:.17g},{self.omega[i]:.17g},{self.mode[i]}\n"
                )


@dataclass
class SolveResult:
    """Final iterate plus the recurred norm and condition estimates.

    phi, psi, chi, anorm, kappa, omega estimate ||r||, ||Ar||, ||x||, ||A||,
    cond(A) and ||Ax||.  With a preconditioner these live in the
    preconditioned metric; x always solves the original system.
    """

    x: np.ndarray
    flag: TerminationFlag
    iterations: int
    phi: float
    psi: float
    chi: float
    anorm: float
    kappa: float
    omega: float
    history: ConvergenceHistory | None = None

    @property
    def success(self) -> bool:
        return self.flag in SUCCESS_FLAGS
