import numpy as np
import pytest
from scipy import linalg as sla

from aaobayes.linalg import (ConvergenceError, DecompositionError, InnerProduct, cholesky,
                             conjugate_gradient, gen_sym_eig, matrix_function, sym_eig,
                             tridiagonal_ql, tridiagonalize)

METHODS = ["lapack", "ql"]


def random_spd(n, seed=0, shift=1.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a @ a.T + shift * np.eye(n)


@pytest.mark.parametrize("method", METHODS)
class TestSymEig:
    def test_identity(self, method):
        w, v = sym_eig(np.eye(3), method=method)
        np.testing.assert_allclose(w, [1, 1, 1], atol=1e-14)
        np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-14)

    def test_two_by_two(self, method):
        w, _ = sym_eig([[2.0, 1.0], [1.0, 2.0]], method=method)
        np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-14)

    def test_diagonal(self, method):
        w, v = sym_eig(np.diag([5.0, -1.0, 0.0]), method=method)
        np.testing.assert_allclose(w, [-1.0, 0.0, 5.0], atol=1e-14)
        np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]], atol=1e-14)

    def test_reconstruction(self, method):
        a = random_spd(30, seed=3) - 15 * np.eye(30)
        w, v = sym_eig(a, method=method)
        np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-10)
        np.testing.assert_allclose(v.T @ v, np.eye(30), atol=1e-12)


def test_ql_matches_lapack():
    a = random_spd(40, seed=7) - 20 * np.eye(40)
    w1, v1 = sym_eig(a, method="lapack")
    w2, v2 = sym_eig(a, method="ql")
    np.testing.assert_allclose(w1, w2, atol=1e-10)
    # eigenvalues are simple here, so vectors agree after the sign convention
    np.testing.assert_allclose(v1, v2, atol=1e-8)


def test_tridiagonalize_preserves_spectrum():
    a = random_spd(12, seed=1)
    d, e, q = tridiagonalize(a)
    t = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    np.testing.assert_allclose(q @ t @ q.T, a, atol=1e-10)
    w, _ = tridiagonal_ql(d, e)
    np.testing.assert_allclose(np.sort(w), sla.eigvalsh(a), atol=1e-10)


def test_asymmetric_input_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])


def test_nonfinite_input_rejected():
    with pytest.raises(ValueError):
        sym_eig([[1.0, np.nan], [np.nan, 1.0]])


def test_ql_iteration_cap():
    a = random_spd(10, seed=2)
    with pytest.raises(DecompositionError):
        sym_eig(a, method="ql", max_iter=0)


@pytest.mark.parametrize("method", METHODS)
class TestGenSymEig:
    def test_identity_mass(self, method):
        a = random_spd(8, seed=4) - 4 * np.eye(8)
        w1, _ = gen_sym_eig(a, np.eye(8), method=method)
        w2, _ = sym_eig(a, method=method)
        np.testing.assert_allclose(w1, w2, atol=1e-12)

    def test_identity_pencil(self, method):
        m = random_spd(6, seed=5)
        w, _ = gen_sym_eig(m, m, method=method)
        np.testing.assert_allclose(w, np.ones(6), atol=1e-12)

    def test_two_by_two(self, method):
        w, x = gen_sym_eig(np.diag([2.0, 1.0]), np.diag([1.0, 2.0]), method=method)
        np.testing.assert_allclose(w, [0.5, 2.0], atol=1e-14)
        np.testing.assert_allclose(x.T @ np.diag([1.0, 2.0]) @ x, np.eye(2), atol=1e-14)

    def test_matches_scipy(self, method):
        a = random_spd(15, seed=6) - 5 * np.eye(15)
        m = random_spd(15, seed=8)
        w, x = gen_sym_eig(a, m, method=method)
        np.testing.assert_allclose(w, sla.eigh(a, m, eigvals_only=True), atol=1e-10)
        np.testing.assert_allclose(a @ x, m @ x * w, atol=1e-9)


def test_cholesky_names_pivot():
    m = np.diag([1.0, 2.0, -1.0, 4.0])
    with pytest.raises(DecompositionError, match="pivot 2"):
        cholesky(m)
    with pytest.raises(DecompositionError):
        gen_sym_eig(np.eye(4), m)


def test_cholesky_factor():
    m = random_spd(9, seed=9)
    low = cholesky(m)
    np.testing.assert_allclose(low @ low.T, m, atol=1e-12)
    assert np.allclose(np.triu(low, 1), 0.0)


class TestMatrixFunction:
    def test_identity_function(self):
        a = random_spd(7, seed=10)
        np.testing.assert_allclose(matrix_function(a, lambda t: t), a, atol=1e-10)

    def test_exp_diagonal(self):
        out = matrix_function(np.diag([0.0, np.log(2.0)]), np.exp)
        np.testing.assert_allclose(out, np.diag([1.0, 2.0]), atol=1e-14)

    def test_sqrt_squares_back(self):
        a = random_spd(20, seed=11)
        r = matrix_function(a, np.sqrt)
        np.testing.assert_allclose(r @ r, a, rtol=1e-8, atol=1e-8 * np.abs(a).max())

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError, match="not finite"):
            matrix_function(np.diag([0.0, 1.0]), lambda t: 1.0 / t)


class TestConjugateGradient:
    def test_identity_one_iteration(self):
        b = np.array([1.0, -2.0, 3.0])
        res = conjugate_gradient(lambda x: x, b)
        np.testing.assert_allclose(res.x, b)
        assert res.iterations == 1 and res.converged

    def test_diagonal(self):
        res = conjugate_gradient(lambda x: np.array([1.0, 2.0]) * x, np.array([1.0, 2.0]))
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-12)

    def test_random_spd_vs_dense(self):
        a = random_spd(20, seed=12)
        b = np.random.default_rng(13).standard_normal(20)
        res = conjugate_gradient(lambda x: a @ x, b, tol=1e-12, max_iter=200)
        ref = sla.cho_solve(sla.cho_factor(a), b)
        assert np.linalg.norm(res.x - ref) <= 1e-8 * np.linalg.norm(ref)

    def test_weighted_inner_product(self):
        # A = W^{-1} S is self-adjoint in <., .>_W for symmetric S
        s = random_spd(12, seed=14)
        wts = np.linspace(1.0, 5.0, 12)
        b = np.random.default_rng(15).standard_normal(12)
        res = conjugate_gradient(lambda x: (s @ x) / wts, b, ip=InnerProduct(wts), tol=1e-12)
        np.testing.assert_allclose(s @ res.x / wts, b, atol=1e-9)

    def test_zero_rhs(self):
        res = conjugate_gradient(lambda x: 2 * x, np.zeros(4))
        assert res.iterations == 0 and np.all(res.x == 0)

    def test_non_convergence_raises(self):
        a = random_spd(50, seed=16, shift=1e-6)
        b = np.ones(50)
        with pytest.raises(ConvergenceError) as info:
            conjugate_gradient(lambda x: a @ x, b, tol=1e-14, max_iter=3)
        assert info.value.iterations == 3 and info.value.x is not None
        res = conjugate_gradient(lambda x: a @ x, b, tol=1e-14, max_iter=3,
                                 raise_on_failure=False)
        assert not res.converged

    def test_indefinite_detected(self):
        with pytest.raises(ConvergenceError, match="positive definite"):
            conjugate_gradient(lambda x: np.array([1.0, -1.0]) * x, np.array([0.0, 1.0]))

    def test_nonfinite_rhs(self):
        with pytest.raises(ConvergenceError):
            conjugate_gradient(lambda x: x, np.array([np.inf, 1.0]))


def test_inner_product_forms():
    v = np.array([1.0, 2.0])
    assert InnerProduct().dot(v, v) == 5.0
    assert InnerProduct(np.array([2.0, 3.0])).dot(v, v) == 14.0
    assert InnerProduct(np.array([[2.0, 0.0], [0.0, 3.0]])).dot(v, v) == 14.0
    assert InnerProduct(lambda w: 2 * w).norm(v) == pytest.approx(np.sqrt(10.0))
