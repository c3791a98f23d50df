import numpy as np
import pytest

from minresqlp.lanczos import PlainLanczos
from minresqlp.operators import (AsymmetricMatrixError, DenseSymmetricMatrix,
                                 MatrixFreeOperator, MatrixMarketError,
                                 SparseSymmetricOperator, check_symmetry,
                                 load_matrix_market, shifted)

DIAG110_MTX = """%%MatrixMarket matrix coordinate real symmetric
3 3 2
1 1 1.0
2 2 1.0
"""

SEC62_MTX = """%%MatrixMarket matrix coordinate real symmetric
% 4x4, rank 3
4 4 6
1 1 1.0
2 1 1.0
2 2 1.0
3 2 1.0
4 3 1.0
4 4 0.0
"""

ASYM_MTX = """%%MatrixMarket matrix coordinate real general
2 2 2
1 2 5.0
2 1 7.0
"""


def test_load_coordinate_diagonal(tmp_path):
    path = tmp_path / "diag.mtx"
    path.write_text(DIAG110_MTX)
    op = load_matrix_market(path)
    assert op.n == 3
    np.testing.assert_allclose(op.apply(np.ones(3)), [1.0, 1.0, 0.0])


def test_load_rank3_example(tmp_path):
    path = tmp_path / "sec62.mtx"
    path.write_text(SEC62_MTX)
    op = load_matrix_market(path)
    np.testing.assert_allclose(op.apply([2.0, 4.0, 3.0, 2.0]),
                               [6.0, 9.0, 6.0, 3.0])


def test_load_asymmetric_general_rejected(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text(ASYM_MTX)
    with pytest.raises(AsymmetricMatrixError):
        load_matrix_market(path)


def test_load_symmetric_general_accepted(tmp_path):
    path = tmp_path / "ok.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "2 2 4\n1 1 2.0\n1 2 5.0\n2 1 5.0\n2 2 3.0\n")
    op = load_matrix_market(path)
    np.testing.assert_allclose(op.apply([1.0, 0.0]), [2.0, 5.0])


def test_load_array_format(tmp_path):
    path = tmp_path / "arr.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n"
                    "2 2\n1.0\n2.0\n2.0\n4.0\n")
    op = load_matrix_market(path)
    np.testing.assert_allclose(op.array, [[1.0, 2.0], [2.0, 4.0]])


@pytest.mark.parametrize("text, match", [
    ("", "empty"),
    ("%%MatrixMarket matrix coordinate complex hermitian\n1 1 1\n1 1 1.0\n",
     "field"),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1.0\n",
     "square"),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1\n",
     "entry"),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.0\n",
     "entries"),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n",
     "range"),
])
def test_load_malformed(tmp_path, text, match):
    path = tmp_path / "bad.mtx"
    path.write_text(text)
    with pytest.raises(MatrixMarketError, match=match):
        load_matrix_market(path)


def test_sparse_backend_above_dense_limit(tmp_path):
    n = 12
    lines = [f"{i} {i} {float(i)}" for i in range(1, n + 1)]
    path = tmp_path / "sp.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    f"{n} {n} {n}\n" + "\n".join(lines) + "\n")
    op = load_matrix_market(path, dense_limit=4)
    assert isinstance(op, SparseSymmetricOperator)
    np.testing.assert_allclose(op.apply(np.ones(n)), np.arange(1.0, n + 1))
    dense = op.to_dense()
    np.testing.assert_allclose(dense.array, np.diag(np.arange(1.0, n + 1)))


def test_dense_matrix_symmetrizes_from_lower_triangle():
    a = np.array([[1.0, 99.0], [2.0, 3.0]])  # upper triangle is ignored
    m = DenseSymmetricMatrix(a)
    np.testing.assert_allclose(m.array, [[1.0, 2.0], [2.0, 3.0]])
    assert not m.array.flags.writeable


def test_shifted_identity_is_zero():
    op = shifted(DenseSymmetricMatrix(np.eye(3)), 1.0)
    np.testing.assert_allclose(op.apply([1.0, 2.0, 3.0]), np.zeros(3))


def test_shifted_zero_shift_is_same_object():
    base = DenseSymmetricMatrix(np.diag([1.0, 1.0, 0.0]))
    assert shifted(base, 0.0) is base


def test_shifted_diag_action():
    op = shifted(DenseSymmetricMatrix(np.diag([2.0, 1.0, 0.0])), 1.0)
    np.testing.assert_allclose(op.apply(np.ones(3)), [1.0, 0.0, -1.0])


def test_symmetry_check_on_loaded_matrix(tmp_path):
    path = tmp_path / "sec62.mtx"
    path.write_text(SEC62_MTX)
    op = load_matrix_market(path)
    worst = check_symmetry(op, trials=100)
    assert worst <= 1e-12


def test_symmetry_check_flags_asymmetric_callable():
    a = np.array([[1.0, 2.0], [0.5, 1.0]])
    op = MatrixFreeOperator(2, lambda x: a @ x)
    with pytest.raises(AsymmetricMatrixError):
        check_symmetry(op, trials=100)


def test_apply_is_deterministic():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((9, 9))
    op = DenseSymmetricMatrix(m + m.T)
    x = rng.standard_normal(9)
    y1, y2 = op.apply(x), op.apply(x)
    np.testing.assert_array_equal(y1, y2)


def test_shift_property_in_lanczos_recurrence():
    # alpha_k(sigma) = alpha_k(0) - sigma with identical beta_k
    rng = np.random.default_rng(17)
    for trial in range(5):
        n = 20
        m = rng.standard_normal((n, n))
        a = DenseSymmetricMatrix(m @ m.T + n * np.eye(n))
        b = rng.standard_normal(n)
        sigma = float(rng.uniform(-3, 3))
        base = PlainLanczos(a, b)
        shift_op = PlainLanczos(shifted(a, sigma), b)
        direct = PlainLanczos(a, b, shift=sigma)
        anorm = float(np.linalg.norm(a.array, 2))
        tol = 1e-10 * (anorm + abs(sigma))
        for _ in range(10):
            a0, b0 = base.step()
            a1, b1 = shift_op.step()
            a2, b2 = direct.step()
            assert a1 == pytest.approx(a0 - sigma, abs=tol)
            assert a2 == pytest.approx(a0 - sigma, abs=tol)
            assert b1 == pytest.approx(b0, abs=tol)
            assert b2 == pytest.approx(b0, abs=tol)
