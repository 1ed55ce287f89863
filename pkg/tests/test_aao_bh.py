import numpy as np
import pytest

import oracles
from aaobayes.aao_bh import (BhBlockVector, BhCubicCoefficients, BhOperator, ComplexRootsError,
                             SpaceTimeField, TimeGrid, analytic_cubic_roots,
                             assemble_discrete_eigensystem, discrete_spectrum_bh, mode_matrix)
from aaobayes.fem import FELaplacian, Mesh
from aaobayes.laplacian import SpectralBasis

BASIS = SpectralBasis(5)
GRID = TimeGrid(1.0, 4)
OP = BhOperator(BASIS, GRID)


def rand_x(rng, op=OP):
    return BhBlockVector(rng.standard_normal((op.grid.size, op.dim)), rng.standard_normal(op.dim))


def rand_y(rng, op=OP):
    return rng.standard_normal((op.grid.size, op.dim)), rng.standard_normal(op.dim)


def test_time_grid():
    np.testing.assert_allclose(GRID.t, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(GRID.weights, [0.125, 0.25, 0.25, 0.25, 0.125])
    with pytest.raises(ValueError):
        TimeGrid(0.0, 4)
    with pytest.raises(ValueError):
        SpaceTimeField(GRID, np.zeros((3, 2)))


def test_cell_integrals_match_quadrature():
    g = np.array([0.5, 20.0, 300.0])
    E, w = oracles.bh_exp_cell_integrals(g, 0.7, 6)
    grid = TimeGrid(0.7, 6)
    np.testing.assert_allclose(grid.cell_exp_integral(g), E, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(grid.weights, w)


class TestForward:
    def test_zero(self):
        assert np.all(OP.solve_forward(np.zeros((GRID.size, OP.dim))) == 0)

    def test_constant_generator(self):
        th = np.random.default_rng(0).standard_normal(OP.dim)
        f = np.tile(BASIS.power(th, 1.0), (GRID.size, 1))
        u = OP.solve_forward(SpaceTimeField(GRID, f))
        for j, t in enumerate(GRID.t):
            np.testing.assert_allclose(u[j], th - BASIS.semigroup(th, t), atol=1e-13)

    def test_scalar_mode_quadrature(self):
        lap = SpectralBasis(1)
        grid = TimeGrid(0.7, 5)
        op = BhOperator(lap, grid)
        g = lap.eigenvalues[0]
        u = op.solve_forward(np.full((grid.size, 1), 1.5))
        assert u[-1, 0] == pytest.approx(oracles.scalar_heat_final_value(g, 1.5, 0.7), rel=1e-12)
        assert u[-1, 0] == pytest.approx(1.5 / g * (1 - np.exp(-g * 0.7)), rel=1e-12)

    def test_state_at_matches_nodes(self):
        rate = np.random.default_rng(1).standard_normal((GRID.size, OP.dim))
        np.testing.assert_allclose(OP.state_at(rate, GRID.t), OP.solve_forward(rate), atol=1e-14)
        np.testing.assert_allclose(OP.final_value(rate), OP.solve_forward(rate)[-1], atol=1e-14)


class TestApply:
    def test_forward_consistency(self):
        th = np.random.default_rng(2).standard_normal(OP.dim)
        rate = -np.tile(BASIS.power(th, 1.0), (GRID.size, 1))
        y1, y2 = OP.apply(BhBlockVector(rate, th))
        np.testing.assert_allclose(y1, 0.0, atol=1e-12)
        np.testing.assert_allclose(y2, BASIS.semigroup(th, GRID.T), atol=1e-13)

    def test_zero(self):
        y1, y2 = OP.apply(OP.zero())
        assert np.all(y1 == 0) and np.all(y2 == 0)

    @pytest.mark.parametrize("lap,grid", [(BASIS, GRID), (SpectralBasis(8), TimeGrid(0.1, 4)),
                                          (FELaplacian(Mesh(7)), TimeGrid(1.0, 7))],
                             ids=["spectral", "spectral-short", "fem"])
    def test_adjoint_identity(self, lap, grid):
        op = BhOperator(lap, grid)
        rng = np.random.default_rng(3)
        for _ in range(20):
            x, y = rand_x(rng, op), rand_y(rng, op)
            lhs = op.range_inner(op.apply(x), y)
            rhs = op.domain_inner(x, op.adjoint(y))
            assert abs(lhs - rhs) <= 1e-8 * op.domain_norm(x) * op.range_norm(y)


class TestAdjoint:
    def test_final_time_adjoint_at_T(self):
        y2 = np.random.default_rng(4).standard_normal(OP.dim)
        out = OP.final_time_adjoint(y2, GRID.T)[0]
        expect = 0.5 * (y2 - BASIS.semigroup(y2, 2 * GRID.T))
        np.testing.assert_allclose(out, expect, atol=1e-14)

    def test_constant_y1_reproduces_forward(self):
        y1 = np.tile(np.random.default_rng(5).standard_normal(OP.dim), (GRID.size, 1))
        adj = OP.adjoint((y1, np.zeros(OP.dim)))
        np.testing.assert_allclose(OP.solve_forward(adj.rate), OP.solve_forward(y1), atol=1e-14)


class TestTransformed:
    def test_conjugates_normal(self):
        x = rand_x(np.random.default_rng(6))
        lhs = OP.transform(OP.normal(x))
        rhs = OP.transformed_normal(OP.transform(x))
        np.testing.assert_allclose(lhs[0], rhs[0], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(lhs[1], rhs[1], rtol=1e-12, atol=1e-12)

    def test_unit_eigenvalue(self):
        n = 2
        g = OP.gamma[n]
        w = GRID.weights
        e = OP.E[:, n] / w  # cell averages of exp(-gamma (T - t))
        # f orthogonal to 1 and e in the piecewise-constant L2(0, T) product
        basis = np.column_stack([np.ones(GRID.size), e])
        f = np.random.default_rng(7).standard_normal(GRID.size)
        coef = np.linalg.solve(basis.T @ (w[:, None] * basis), basis.T @ (w * f))
        f = f - basis @ coef
        F = np.zeros((GRID.size, OP.dim))
        F[:, n] = f
        out_f, out_g = OP.transformed_normal((F, np.zeros(OP.dim)))
        np.testing.assert_allclose(out_f, F, atol=1e-13)
        np.testing.assert_allclose(out_g, 0.0, atol=1e-13)
        assert g > 0

    def test_symmetry(self):
        rng = np.random.default_rng(8)
        w = GRID.weights[:, None]
        for _ in range(10):
            x, y = rand_y(rng), rand_y(rng)
            tx, ty = OP.transformed_normal(x), OP.transformed_normal(y)
            a = np.sum(w * tx[0] * y[0]) + tx[1] @ y[1]
            b = np.sum(w * x[0] * ty[0]) + x[1] @ ty[1]
            assert abs(a - b) <= 1e-10 * max(abs(a), 1.0)

    def test_parameter_block(self):
        n = 3
        g = np.zeros(OP.dim)
        g[n] = 1.0
        _, out_g = OP.transformed_normal((np.zeros((GRID.size, OP.dim)), g))
        np.testing.assert_allclose(out_g, (GRID.T + 1 / OP.gamma[n]) * g, atol=1e-15)


class TestNormBounds:
    def test_history_to_final_into_h1(self):
        rng = np.random.default_rng(9)
        ratios = []
        for _ in range(200):
            f = rng.standard_normal((GRID.size, OP.dim)) * rng.uniform(0, 3, OP.dim)
            ratios.append(OP.h1_norm(OP.history_to_final(f)) / OP.l2l2_norm(f))
        assert max(ratios) <= 1 / np.sqrt(2)

    def test_d_block(self):
        rng = np.random.default_rng(10)
        ratios = [OP.d_block_norm(f) / OP.l2l2_norm(f)
                  for f in rng.standard_normal((200, GRID.size, OP.dim))]
        assert max(ratios) <= 0.5


class TestCubic:
    def test_small_mu_limit(self):
        r = analytic_cubic_roots(BhCubicCoefficients(1e-5, 1.0))
        np.testing.assert_allclose(r, [0.0, 1.5, 2.0], atol=1e-4)

    def test_vieta(self):
        for mu in (0.01, 0.05, 0.3, 0.5):
            c = BhCubicCoefficients(mu, 1.0)
            r = analytic_cubic_roots(c)
            assert np.prod(r) == pytest.approx(mu * np.exp(-2 / mu), rel=1e-10)
            assert r.sum() == pytest.approx(1 + 2.5 + c.alpha, rel=1e-10)

    def test_smallest_root_asymptotics(self):
        for mu in (0.02, 0.05, 0.1):
            r = analytic_cubic_roots(BhCubicCoefficients(mu, 1.0))
            assert r[0] == pytest.approx(mu * np.exp(-2 / mu) / (r[1] * r[2]), rel=1e-12)
            assert r[0] <= 2 * mu * np.exp(-2 / mu)

    @pytest.mark.parametrize("gamma,T,frozen", [
        (2.0, 1.0, [0.002949132415726, 1.060906374257796, 2.92698667388211]),
        (20.0, 1.0, [0.0, 1.386895632859040, 2.163104367140960]),
        (20.0, 0.1, [5.543486699730246e-04, 1.018840627022904, 1.621447204862756]),
    ])
    def test_frozen_nystrom_values(self, gamma, T, frozen):
        # frozen values come from oracles.nystrom_nonunit_eigenvalues
        r = analytic_cubic_roots(BhCubicCoefficients(1 / gamma, T))
        np.testing.assert_allclose(r, frozen, atol=1e-9)

    def test_half_rate_alpha_differs(self):
        a = BhCubicCoefficients(0.5, 1.0)
        b = BhCubicCoefficients(0.5, 1.0, half_rate_alpha=True)
        assert a.alpha != b.alpha

    def test_invalid(self):
        with pytest.raises(ValueError):
            BhCubicCoefficients(-1.0)
        assert issubclass(ComplexRootsError, ArithmeticError)


class TestDiscreteSystem:
    def test_symmetric(self):
        a = assemble_discrete_eigensystem(Mesh(6), 4, 1.0)
        assert np.abs(a - a.T).max() <= 1e-12 * np.abs(a).max()

    @pytest.mark.parametrize("gamma", [2.0, 19.7, 150.0])
    def test_mode_matrix_vs_entrywise_oracle(self, gamma):
        got = np.linalg.eigvalsh(mode_matrix(gamma, GRID, quadrature="nodal"))
        ref = np.linalg.eigvalsh(oracles.nodal_rule_mode_matrix(gamma, 1.0, 4))
        np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_exact_quadrature_converges_to_continuous(self):
        g = 20.0
        lam = np.linalg.eigvalsh(mode_matrix(g, TimeGrid(1.0, 2000), quadrature="exact"))
        far = np.sort(lam[np.argsort(np.abs(lam - 1))[-3:]])
        np.testing.assert_allclose(far, oracles.nystrom_nonunit_eigenvalues(g, 1.0), atol=1e-4)

    @pytest.mark.parametrize("quadrature,corner", [("nodal", "consistent"), ("nodal", "variant"),
                                                   ("exact", "consistent")])
    def test_dense_and_modal_routes_agree(self, quadrature, corner):
        mesh = Mesh(6)
        a = discrete_spectrum_bh(mesh, 4, 1.0, 96, "dense", quadrature, corner)
        b = discrete_spectrum_bh(mesh, 4, 1.0, 96, "modal", quadrature, corner)
        np.testing.assert_allclose(a, b, atol=1e-10)

    def test_psd(self):
        lam = discrete_spectrum_bh(Mesh(10), 4, 1.0, 6 * 64)
        assert lam.min() >= -1e-8

    def test_bad_options(self):
        with pytest.raises(ValueError):
            mode_matrix(1.0, GRID, quadrature="midpoint")
        with pytest.raises(ValueError):
            mode_matrix(1.0, GRID, quadrature="exact", corner="variant")
        with pytest.raises(ValueError):
            discrete_spectrum_bh(Mesh(5), count=10_000)
