import numpy as np
import pytest

from aaobayes.aao_is import (IsOperator, analytic_eigenvalue_pair, discrete_spectrum,
                             label_branches, spectral_eigenvalues)
from aaobayes.fem import FELaplacian, Mesh, assemble_mass, assemble_stiffness
from aaobayes.laplacian import SpectralBasis
from aaobayes.spectra import find_clusters, sqrt_decay_fit

BASIS = SpectralBasis(6)
OP = IsOperator(BASIS)


def rand(seed, n=BASIS.dim):
    return np.random.default_rng(seed).standard_normal(n)


def unit(i, n=BASIS.dim):
    e = np.zeros(n)
    e[i] = 1.0
    return e


class TestApply:
    def test_model_consistent_pair(self):
        u = rand(0)
        y1, y2 = OP.apply((u, BASIS.power(u, 1.0)))
        np.testing.assert_allclose(y1, 0.0, atol=1e-12)
        np.testing.assert_allclose(y2, u)

    def test_zero_state(self):
        th = rand(1)
        y1, y2 = OP.apply((np.zeros(BASIS.dim), th))
        np.testing.assert_allclose(y1, -th)
        assert np.all(y2 == 0)

    def test_eigenfunction(self):
        e = unit(0)
        y1, y2 = OP.apply((e, np.zeros(BASIS.dim)))
        np.testing.assert_allclose(y1, 2 * np.pi ** 2 * e)
        np.testing.assert_allclose(y2, e)


class TestAdjoint:
    def test_zero(self):
        u, th = OP.adjoint((np.zeros(BASIS.dim), np.zeros(BASIS.dim)))
        assert np.all(u == 0) and np.all(th == 0)

    def test_eigenfunction(self):
        e = unit(0)
        u, th = OP.adjoint((e, np.zeros(BASIS.dim)))
        np.testing.assert_allclose(u, e / (2 * np.pi ** 2))
        np.testing.assert_allclose(th, -e)

    @pytest.mark.parametrize("lap", [BASIS, FELaplacian(Mesh(9))], ids=["spectral", "fem"])
    def test_identity(self, lap):
        op = IsOperator(lap)
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = (rng.standard_normal(lap.dim), rng.standard_normal(lap.dim))
            y = (rng.standard_normal(lap.dim), rng.standard_normal(lap.dim))
            lhs = op.range_inner(op.apply(x), y)
            rhs = op.domain_inner(x, op.adjoint(y))
            assert abs(lhs - rhs) <= 1e-10 * op.domain_norm(x) * op.range_norm(y)


class TestTransformed:
    def test_unitary_transform(self):
        x = (rand(3), rand(4))
        z = OP.transform(x)
        assert np.sum(z[0] ** 2) + np.sum(z[1] ** 2) == pytest.approx(OP.domain_norm(x) ** 2)
        back = OP.inverse_transform(z)
        np.testing.assert_allclose(back[0], x[0])

    def test_conjugates_normal_operator(self):
        x = (rand(5), rand(6))
        lhs = OP.transform(OP.normal(x))
        rhs = OP.transformed_normal(OP.transform(x))
        np.testing.assert_allclose(lhs[0], rhs[0], rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(lhs[1], rhs[1], rtol=1e-12, atol=1e-14)

    def test_near_kernel_direction(self):
        g = unit(BASIS.dim - 1)
        f_out, g_out = OP.transformed_normal((g, g))
        mu = BASIS.eigenvalues[-1] ** -2
        np.testing.assert_allclose(f_out, mu * g, atol=1e-15)
        np.testing.assert_allclose(g_out, 0.0, atol=1e-15)

    def test_eigenvalue_two_direction(self):
        g = unit(BASIS.dim - 1)
        f_out, g_out = OP.transformed_normal((-g, g))
        mu = BASIS.eigenvalues[-1] ** -2
        np.testing.assert_allclose(f_out, -(2 + mu) * g, atol=1e-15)
        assert mu < 1e-5
        np.testing.assert_allclose(g_out, 2 * g, atol=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            x = (rng.standard_normal(BASIS.dim), rng.standard_normal(BASIS.dim))
            y = (rng.standard_normal(BASIS.dim), rng.standard_normal(BASIS.dim))
            tx, ty = OP.transformed_normal(x), OP.transformed_normal(y)
            a = tx[0] @ y[0] + tx[1] @ y[1]
            b = x[0] @ ty[0] + x[1] @ ty[1]
            assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


class TestAnalyticPair:
    def test_small_mu_limit(self):
        l1, l2 = analytic_eigenvalue_pair(1e-12)
        assert l1 == pytest.approx(2.0, abs=1e-11) and abs(l2) < 1e-11

    def test_mu_one(self):
        l1, l2 = analytic_eigenvalue_pair(1.0)
        # roots of x^2 - 3x + 1
        assert l1 == pytest.approx((3 + np.sqrt(5)) / 2, abs=1e-14)
        assert l2 == pytest.approx((3 - np.sqrt(5)) / 2, abs=1e-14)
        assert (l1, l2) == (pytest.approx(2.6180, abs=1e-4), pytest.approx(0.3820, abs=1e-4))

    def test_vieta(self):
        mu = np.logspace(-8, 2, 50)
        l1, l2 = analytic_eigenvalue_pair(mu)
        np.testing.assert_allclose(l1 + l2, 2 + mu, rtol=1e-12)
        np.testing.assert_allclose(l1 * l2, mu, rtol=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            analytic_eigenvalue_pair(0.0)

    def test_dense_matrix_matches(self):
        lam = spectral_eigenvalues(BASIS)
        _, _, err = label_branches(lam, BASIS.eigenvalues)
        assert err.max() <= 1e-8


@pytest.fixture(scope="module")
def spectrum_result():
    return discrete_spectrum(Mesh(12), count=200)


class TestDiscreteSpectrum:
    def test_matches_pencil_closed_form(self, spectrum_result):
        m = Mesh(12)
        # pencil eigenvalues from a route that does not use the package's solver
        from scipy.linalg import eigh
        gam = eigh(assemble_stiffness(m), assemble_mass(m), eigvals_only=True)
        np.testing.assert_allclose(gam, spectrum_result.pencil_eigenvalues, rtol=1e-10)
        _, _, err = label_branches(spectrum_result.eigenvalues, gam)
        assert err.max() <= 1e-8

    def test_two_clusters(self, spectrum_result):
        branch, _, _ = label_branches(spectrum_result.eigenvalues, spectrum_result.pencil_eigenvalues)
        upper = spectrum_result.eigenvalues[branch == "upper"]
        lower = spectrum_result.eigenvalues[branch == "lower"]
        assert np.all(np.abs(upper - 2) < 0.01)
        assert lower.max() < 0.01
        clusters = find_clusters(spectrum_result.eigenvalues)
        assert any(abs(c.center - 2) < 0.05 for c in clusters)

    def test_lower_branch_quadratic_decay(self, spectrum_result):
        branch, _, _ = label_branches(spectrum_result.eigenvalues, spectrum_result.pencil_eigenvalues)
        assert sqrt_decay_fit(spectrum_result.eigenvalues[branch == "lower"]).r2 >= 0.95

    def test_ql_route_agrees(self):
        a = discrete_spectrum(Mesh(6), count=20, method="lapack").eigenvalues
        b = discrete_spectrum(Mesh(6), count=20, method="ql").eigenvalues
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_count_checked(self):
        with pytest.raises(ValueError):
            discrete_spectrum(Mesh(5), count=100)
