"""Krylov solvers for symmetric, possibly singular systems (A - sigma I)x ~ b.

MINRES minimizes the residual over the Krylov subspace; MINRES-QLP adds a
rank-revealing QLP step so that singular and ill-conditioned problems get
the minimum-length least-squares solution with trustworthy norm estimates.
"""

from .common import (ConvergenceHistory, SolveResult, SolverConfig,
                     TerminationFlag)
from .lanczos import PlainLanczos, PreconditionedLanczos
from .minres import minres_solve
from .operators import (AsymmetricMatrixError, CallbackPreconditioner,
                        DenseSymmetricMatrix, DiagonalPreconditioner,
                        IdentityPreconditioner, IndefinitePreconditionerError,
                        MatrixFreeOperator, MatrixMarketError, Preconditioner,
                        SparseSymmetricOperator, SymmetricOperator,
                        load_matrix_market, shifted)
from .qlp import minresqlp_solve

__all__ = [
    "AsymmetricMatrixError",
    "CallbackPreconditioner",
    "ConvergenceHistory",
    "DenseSymmetricMatrix",
    "DiagonalPreconditioner",
    "IdentityPreconditioner",
    "IndefinitePreconditionerError",
    "MatrixFreeOperator",
    "MatrixMarketError",
    "PlainLanczos",
    "Preconditioner",
    "PreconditionedLanczos",
    "SolveResult",
    "SolverConfig",
    "SparseSymmetricOperator",
    "SymmetricOperator",
    "TerminationFlag",
    "load_matrix_market",
    "minres_solve",
    "minresqlp_solve",
    "shifted",
]

__version__ = "0.1.0"
