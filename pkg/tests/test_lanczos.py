import math

import numpy as np
import pytest

from minresqlp.lanczos import (PlainLanczos, PreconditionedLanczos,
                               ZeroRhsError, tridiagonalize)
from minresqlp.operators import (DenseSymmetricMatrix, DiagonalPreconditioner,
                                 IdentityPreconditioner,
                                 IndefinitePreconditionerError,
                                 CallbackPreconditioner)
from minresqlp.oracle import eigendecomposition

from conftest import random_symmetric


def test_init_normalizes():
    op = DenseSymmetricMatrix(np.eye(3))
    it = PlainLanczos(op, np.array([3.0, 4.0, 0.0]))
    assert it.beta1 == 5.0
    np.testing.assert_allclose(it.v_curr, [0.6, 0.8, 0.0])


def test_init_unit_vector():
    it = PlainLanczos(DenseSymmetricMatrix(np.eye(2)), np.array([1.0, 0.0]))
    assert it.beta1 == 1.0
    np.testing.assert_allclose(it.v_curr, [1.0, 0.0])


def test_init_zero_rhs():
    with pytest.raises(ZeroRhsError):
        PlainLanczos(DenseSymmetricMatrix(np.eye(2)), np.zeros(2))


def test_first_step_values():
    op = DenseSymmetricMatrix(np.diag([1.0, 1.0, 0.0]))
    it = PlainLanczos(op, np.ones(3))
    alpha, beta2 = it.step()
    assert alpha == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert beta2 == pytest.approx(math.sqrt(2.0) / 3.0, rel=1e-14)


def test_eigenvector_rhs_terminates_immediately():
    it = PlainLanczos(DenseSymmetricMatrix(np.eye(4)),
                      np.array([1.0, 2.0, 0.0, -1.0]))
    alpha, beta2 = it.step()
    assert alpha == pytest.approx(1.0)
    assert beta2 <= 1e-15


def test_two_step_tridiagonal_eigenvalues():
    op = DenseSymmetricMatrix(np.diag([2.0, 1.0]))
    it = PlainLanczos(op, np.array([1.0, 1.0]))
    a1, b2 = it.step()
    a2, b3 = it.step()
    t2 = np.array([[a1, b2], [b2, a2]])
    lam = np.sort(eigendecomposition(t2).eigenvalues)
    np.testing.assert_allclose(lam, [1.0, 2.0], atol=1e-14)
    assert b3 <= 1e-14


def test_identity_preconditioner_single_step_identity():
    # one step from the shared initial state agrees to rounding: the z/q
    # recurrence with M = I computes the same arithmetic as the v form
    rng = np.random.default_rng(3)
    n = 15
    a = DenseSymmetricMatrix(random_symmetric(rng, n))
    b = rng.standard_normal(n)
    plain = PlainLanczos(a, b)
    prec = PreconditionedLanczos(a, IdentityPreconditioner(n), b)
    assert prec.beta1 == pytest.approx(plain.beta1, rel=4e-16)
    np.testing.assert_allclose(prec.basis_vector(), plain.basis_vector(),
                               atol=2e-16)
    a0, b0 = plain.step()
    a1, b1 = prec.step()
    assert a1 == pytest.approx(a0, abs=2e-16 * max(1.0, abs(a0)) * n)
    assert b1 == pytest.approx(b0, abs=2e-16 * max(1.0, b0) * n)
    np.testing.assert_allclose(prec.basis_vector(), plain.basis_vector(),
                               atol=2e-15)


def test_identity_preconditioner_matches_plain_sequence():
    # over a full run the two recurrences round differently but stay close
    rng = np.random.default_rng(3)
    n = 15
    a = DenseSymmetricMatrix(random_symmetric(rng, n))
    b = rng.standard_normal(n)
    plain = PlainLanczos(a, b)
    prec = PreconditionedLanczos(a, IdentityPreconditioner(n), b)
    for _ in range(n - 1):
        a0, b0 = plain.step()
        a1, b1 = prec.step()
        assert a1 == pytest.approx(a0, abs=1e-9)
        assert b1 == pytest.approx(b0, abs=1e-9)


def test_preconditioned_beta1():
    # beta_1 = sqrt(b' M^{-1} b) = 1 for M = diag(4, 1), b = (2, 0)
    a = DenseSymmetricMatrix(np.eye(2))
    m = DiagonalPreconditioner(np.array([4.0, 1.0]))
    it = PreconditionedLanczos(a, m, np.array([2.0, 0.0]))
    assert it.beta1 == pytest.approx(1.0, rel=1e-15)


def test_indefinite_preconditioner_raises():
    a = DenseSymmetricMatrix(np.eye(2))
    bad = CallbackPreconditioner(2, lambda z: np.array([-1.0, 1.0]) * z)
    with pytest.raises(IndefinitePreconditionerError):
        PreconditionedLanczos(a, bad, np.array([1.0, 0.1]))


def test_basis_relation_av_equals_vt():
    # A V_k = V_{k+1} T_(k) columnwise to 1e-12 * ||A||
    rng = np.random.default_rng(9)
    n = 60
    a_arr = random_symmetric(rng, n, lo=0.2, hi=3.0)
    a = DenseSymmetricMatrix(a_arr)
    b = rng.standard_normal(n)
    alphas, betas, v = tridiagonalize(a, b, max_steps=50)
    k = len(alphas)
    anorm = np.abs(eigendecomposition(a_arr).eigenvalues).max()
    for j in range(k):
        col = alphas[j] * v[:, j]
        if j > 0:
            col += betas[j - 1] * v[:, j - 1]
        if j + 1 < v.shape[1]:
            col += betas[j] * v[:, j + 1]
        assert np.linalg.norm(a.apply(v[:, j]) - col) <= 1e-12 * anorm * n


def test_breakdown_at_spectral_support():
    # b supported on m eigenvectors of a diagonal matrix: breakdown at k = m
    diag = np.array([3.0, 1.0, -2.0, 5.0, 0.5])
    a = DenseSymmetricMatrix(np.diag(diag))
    b = np.array([1.0, 0.0, 2.0, 0.0, 1.0])  # m = 3 distinct eigenvalues
    alphas, betas, _ = tridiagonalize(a, b, max_steps=10, reorthogonalize=True)
    assert len(alphas) == 3
    assert betas[-1] == 0.0


def test_reorthogonalized_grade_on_identity():
    a = DenseSymmetricMatrix(np.eye(6))
    alphas, betas, _ = tridiagonalize(a, np.ones(6), max_steps=6)
    assert len(alphas) == 1 and betas[0] == 0.0


def test_range_membership_vs_final_tridiagonal_rank():
    # T_l nonsingular exactly when b lies in range(A)
    rng = np.random.default_rng(21)
    hits = {True: 0, False: 0}
    for trial in range(40):
        n = int(rng.integers(6, 16))
        nullity = int(rng.integers(1, 4))
        a_arr = random_symmetric(rng, n, nullity=nullity)
        a = DenseSymmetricMatrix(a_arr)
        evd = eigendecomposition(a_arr)
        if trial % 2 == 0:
            b = a.apply(rng.standard_normal(n))  # compatible
        else:
            b = rng.standard_normal(n)
        if np.linalg.norm(b) == 0:
            continue
        u2 = evd.vectors[:, np.abs(evd.eigenvalues) <= n * evd.anorm * 1e-16]
        in_range = np.linalg.norm(u2.T @ b) <= 1e-8 * np.linalg.norm(b)
        alphas, betas, _ = tridiagonalize(a, b, max_steps=n + 2,
                                          reorthogonalize=True,
                                          breakdown_rtol=1e-8)
        k = len(alphas)
        t = np.diag(alphas)
        if k > 1:
            t += np.diag(betas[:k - 1], 1) + np.diag(betas[:k - 1], -1)
        tl_eigs = np.abs(eigendecomposition(t).eigenvalues)
        nonsingular = tl_eigs.min() > 1e-8 * max(tl_eigs.max(), 1e-300)
        assert nonsingular == in_range
        hits[in_range] += 1
    assert hits[True] >= 5 and hits[False] >= 5
