"""Symmetric linear operators, preconditioner callbacks, Matrix Market I/O.

Operators are immutable after construction: ``apply`` never mutates state,
so instances can be shared freely between threads and solves.
"""

from __future__ import annotations

import numpy as np

#: Relative tolerance for accepting a general-format matrix as symmetric.
DEFAULT_SYMMETRY_TOL = 1e-12

#: Above this dimension Matrix Market files load into a coordinate-backed
#: operator instead of a dense array.
DENSE_LIMIT = 4096


class MatrixMarketError(ValueError):
    """Malformed or unsupported Matrix Market input."""


class AsymmetricMatrixError(ValueError):
    """Entries of a general-format matrix violate the symmetry tolerance."""


class IndefinitePreconditionerError(RuntimeError):
    """A preconditioner solve produced q with q'z < 0; M is not SPD."""


class SymmetricOperator:
    """Matrix-free v -> Av for symmetric A of order n."""

    def __init__(self, n: int):
        self.n = int(n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def shifted(self, sigma: float) -> "SymmetricOperator":
        return shifted(self, sigma)


class MatrixFreeOperator(SymmetricOperator):
    """Wrap a callable computing Av.  Symmetry is the caller's promise."""

    def __init__(self, n: int, fn):
        super().__init__(n)
        self._fn = fn

    def apply(self, x):
        return np.asarray(self._fn(x), dtype=float)


class DenseSymmetricMatrix(SymmetricOperator):
    """Dense symmetric matrix; the lower triangle defines the full matrix.

    Construction mirrors the lower triangle so the stored array is exactly
    symmetric even when the input carries rounding-level asymmetry.
    """

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        super().__init__(a.shape[0])
        lower = np.tril(a)
        self.array = lower + np.tril(a, -1).T
        self.array.setflags(write=False)

    def apply(self, x):
        return self.array @ np.asarray(x, dtype=float)


class SparseSymmetricOperator(SymmetricOperator):
    """Coordinate-format symmetric operator for larger Matrix Market inputs."""

    def __init__(self, n: int, rows: np.ndarray, cols: np.ndarray,
                 vals: np.ndarray):
        super().__init__(n)
        # store the fully mirrored entry list; apply is a scatter-add
        self.rows = np.asarray(rows, dtype=np.intp)
        self.cols = np.asarray(cols, dtype=np.intp)
        self.vals = np.asarray(vals, dtype=float)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return np.bincount(self.rows, weights=self.vals * x[self.cols],
                           minlength=self.n)

    def to_dense(self) -> DenseSymmetricMatrix:
        a = np.zeros((self.n, self.n))
        np.add.at(a, (self.rows, self.cols), self.vals)
        return DenseSymmetricMatrix(a)


class _ShiftedOperator(SymmetricOperator):
    def __init__(self, op: SymmetricOperator, sigma: float):
        super().__init__(op.n)
        self._op = op
        self.sigma = float(sigma)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return self._op.apply(x) - self.sigma * x


def shifted(op: SymmetricOperator, sigma: float) -> SymmetricOperator:
    """Operator computing Av - sigma*v."""
    if sigma == 0.0:
        return op
    return _ShiftedOperator(op, sigma)


class Preconditioner:
    """Solve callback q = M^{-1} z for symmetric positive-definite M.

    M itself is never formed or factored here; the solvers only ever need
    the solve and check q'z > 0 as a positive-definiteness witness.
    """

    def __init__(self, n: int):
        self.n = int(n)

    def solve(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class IdentityPreconditioner(Preconditioner):
    def solve(self, z):
        return np.array(z, dtype=float)


class DiagonalPreconditioner(Preconditioner):
    """M = diag(m) with every m_j > 0."""

    def __init__(self, m: np.ndarray):
        m = np.asarray(m, dtype=float)
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("diagonal preconditioner entries must be positive")
        super().__init__(m.size)
        self.m = m

    def solve(self, z):
        return np.asarray(z, dtype=float) / self.m


class CallbackPreconditioner(Preconditioner):
    def __init__(self, n: int, fn):
        super().__init__(n)
        self._fn = fn

    def solve(self, z):
        return np.asarray(self._fn(z), dtype=float)


def check_symmetry(op: SymmetricOperator, trials: int = 100,
                   rtol: float = DEFAULT_SYMMETRY_TOL, seed: int = 0,
                   anorm_hint: float | None = None) -> float:
    """Largest relative defect |x'(Ay) - (Ax)'y| over random vector pairs.

    Raises AsymmetricMatrixError when the defect exceeds
    rtol * ||A|| * ||x|| * ||y||.  Returns the worst relative defect seen.
    """
    rng = np.random.default_rng(seed)
    n = op.n
    if anorm_hint is None:
        # cheap norm proxy: a few applications to random unit vectors
        anorm_hint = 0.0
        for _ in range(3):
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            anorm_hint = max(anorm_hint, float(np.linalg.norm(op.apply(v))))
        anorm_hint = max(anorm_hint, np.finfo(float).tiny)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        lhs = float(x @ op.apply(y))
        rhs = float(op.apply(x) @ y)
        scale = anorm_hint * np.linalg.norm(x) * np.linalg.norm(y)
        defect = abs(lhs - rhs) / scale
        worst = max(worst, defect)
        if defect > rtol:
            raise AsymmetricMatrixError(
                f"operator failed the symmetry check: relative defect {defect:.3e}"
            )
    return worst


def _parse_header(line: str):
    parts = line.strip().lower().split()
    if len(parts) < 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
        raise MatrixMarketError(f"not a Matrix Market header: {line.strip()!r}")
    fmt, fld, sym = parts[2], parts[3], parts[4]
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}")
    if fld not in ("real", "integer"):
        raise MatrixMarketError(f"unsupported field {fld!r} (real data only)")
    if sym not in ("symmetric", "general"):
        raise MatrixMarketError(
            f"unsupported symmetry {sym!r} (need symmetric or general)")
    return fmt, sym


def load_matrix_market(path, symmetry_tol: float = DEFAULT_SYMMETRY_TOL,
                       dense_limit: int = DENSE_LIMIT) -> SymmetricOperator:
    """Read a real coordinate or array Matrix Market file as a symmetric
    operator.

    Files declared ``general`` are accepted only if
    max|A_ij - A_ji| <= symmetry_tol * max|A_ij|; the symmetrized matrix is
    returned.  Dimension above ``dense_limit`` yields a coordinate-backed
    operator, otherwise a dense one.
    """
    with open(path) as fh:
        header = fh.readline()
        if not header:
            raise MatrixMarketError("empty file")
        fmt, sym = _parse_header(header)
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("%")]
    if not lines:
        raise MatrixMarketError("missing size line")

    size_parts = lines[0].split()
    data_lines = lines[1:]
    if fmt == "coordinate":
        if len(size_parts) != 3:
            raise MatrixMarketError(f"bad coordinate size line: {lines[0].strip()!r}")
        nrows, ncols, nnz = (int(p) for p in size_parts)
        if nrows != ncols:
            raise MatrixMarketError(f"matrix is not square: {nrows} x {ncols}")
        if len(data_lines) != nnz:
            raise MatrixMarketError(
                f"expected {nnz} entries, found {len(data_lines)}")
        rows = np.empty(nnz, dtype=np.intp)
        cols = np.empty(nnz, dtype=np.intp)
        vals = np.empty(nnz, dtype=float)
        for idx, ln in enumerate(data_lines):
            parts = ln.split()
            if len(parts) != 3:
                raise MatrixMarketError(f"bad coordinate entry: {ln.strip()!r}")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise MatrixMarketError(f"bad coordinate entry: {ln.strip()!r}") from exc
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixMarketError(f"index out of range: {ln.strip()!r}")
            if sym == "symmetric" and i < j:
                raise MatrixMarketError(
                    f"symmetric files store the lower triangle only, got "
                    f"entry ({i}, {j})")
            rows[idx], cols[idx], vals[idx] = i - 1, j - 1, v
        return _assemble(nrows, rows, cols, vals, sym, symmetry_tol, dense_limit)

    # array format: column-major dense values
    if len(size_parts) != 2:
        raise MatrixMarketError(f"bad array size line: {lines[0].strip()!r}")
    nrows, ncols = (int(p) for p in size_parts)
    if nrows != ncols:
        raise MatrixMarketError(f"matrix is not square: {nrows} x {ncols}")
    expected = nrows * ncols if sym == "general" else nrows * (nrows + 1) // 2
    values = []
    for ln in data_lines:
        for tok in ln.split():
            try:
                values.append(float(tok))
            except ValueError as exc:
                raise MatrixMarketError(f"bad array value: {tok!r}") from exc
    if len(values) != expected:
        raise MatrixMarketError(
            f"expected {expected} array values, found {len(values)}")
    a = np.zeros((nrows, ncols))
    it = iter(values)
    if sym == "general":
        for j in range(ncols):
            for i in range(nrows):
                a[i, j] = next(it)
        _check_dense_symmetry(a, symmetry_tol)
    else:
        for j in range(ncols):
            for i in range(j, nrows):
                a[i, j] = next(it)
                a[j, i] = a[i, j]
    return DenseSymmetricMatrix(a)


def _check_dense_symmetry(a: np.ndarray, tol: float) -> None:
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return
    defect = np.max(np.abs(a - a.T))
    if defect > tol * scale:
        raise AsymmetricMatrixError(
            f"general matrix is asymmetric: max|A_ij - A_ji| = {defect:.3e} "
            f"exceeds {tol:.1e} * max|A_ij|")


def _assemble(n, rows, cols, vals, sym, tol, dense_limit):
    if sym == "symmetric":
        off = rows != cols
        rows_full = np.concatenate([rows, cols[off]])
        cols_full = np.concatenate([cols, rows[off]])
        vals_full = np.concatenate([vals, vals[off]])
    else:
        # validate numerically: accumulated A must match A' entrywise
        a_max = float(np.max(np.abs(vals))) if vals.size else 0.0
        pair_sum: dict[tuple[int, int], float] = {}
        for i, j, v in zip(rows, cols, vals):
            pair_sum[(int(i), int(j))] = pair_sum.get((int(i), int(j)), 0.0) + v
        for (i, j), v in pair_sum.items():
            w = pair_sum.get((j, i), 0.0)
            if abs(v - w) > tol * max(a_max, np.finfo(float).tiny):
                raise AsymmetricMatrixError(
                    f"general matrix is asymmetric at ({i + 1}, {j + 1}): "
                    f"{v!r} vs {w!r}")
        rows_full, cols_full, vals_full = rows, cols, vals
    if n <= dense_limit:
        a = np.zeros((n, n))
        np.add.at(a, (rows_full, cols_full), vals_full)
        if sym == "general":
            a = 0.5 * (a + a.T)  # symmetrize rounding-level defects
        return DenseSymmetricMatrix(a)
    return SparseSymmetricOperator(n, rows_full, cols_full, vals_full)
