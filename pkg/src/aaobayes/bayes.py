"""Posterior computation for linear all-at-once models.

A problem is the affine model ``M(u, theta) = 0`` together with an
observation ``O_u u + O_theta theta``.  Its two reductions are

* parameter-reduced: ``u = S theta + s0`` (parameter-to-state map),
* state-reduced: ``theta = R u + r0`` (a left inverse of the model in
  ``theta``; for the backwards heat problem ``R = (1/T) L*``).

The cost is

    J(u, theta) = 1/2 |Sigma^{-1/2} (O_u u + O_theta theta - y)|^2
                  + alpha/2 (<u, C1 u>_U + 2 <u, C2 theta>_U + <theta, C3 theta>_X).

With noise covariance ``delta^2 Sigma`` and prior covariance
``(delta^2 / alpha) C0`` the posterior is Gaussian with mean at the minimiser
and covariance ``delta^2 H^{-1}`` (``H`` the reduced Hessian).

All vectors in this module are modal coefficient arrays: ``(d,)`` for
spatial fields and ``(N + 1, d)`` for generators of space-time states.
Gradients are Riesz representers in the weighted inner products of ``U`` and
``X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .aao_bh import BhOperator, TimeGrid
from .laplacian import DiagonalizedLaplacian
from .linalg import CGResult, InnerProduct, conjugate_gradient, sym_eig

__all__ = [
    "Coupling",
    "CostConfig",
    "LinearAaoProblem",
    "InverseSourceProblem",
    "BackwardsHeatProblem",
    "PosteriorModel",
    "DirectPosterior",
    "SpcReport",
    "cost_theta",
    "cost_u",
    "reduced_gradient_theta",
    "reduced_hessian_theta_action",
    "reduced_gradient_u",
    "reduced_hessian_u_action",
    "map_estimate",
    "posterior_direct",
    "sample_posterior",
    "spc_components",
    "spc_bound_trivial_prior",
]


# -- problems ----------------------------------------------------------------

class LinearAaoProblem:
    """Interface of a linear all-at-once problem in modal coordinates."""

    name = "abstract"
    omega_u: np.ndarray
    omega_theta: np.ndarray

    @property
    def shape_u(self):
        return self.omega_u.shape

    @property
    def dim_theta(self) -> int:
        return self.omega_theta.size

    def inner_u(self, a, b) -> float:
        return float(np.sum(self.omega_u * a * b))

    def inner_theta(self, a, b) -> float:
        return float(np.sum(self.omega_theta * a * b))

    # parameter-to-state
    def S(self, theta):
        raise NotImplementedError

    def S_adj(self, v):
        raise NotImplementedError

    def s0(self):
        return np.zeros(self.shape_u)

    # state-to-parameter
    def R(self, u):
        raise NotImplementedError

    def R_adj(self, eta):
        raise NotImplementedError

    def r0(self):
        return np.zeros(self.dim_theta)

    # observation
    def obs_u(self, u):
        raise NotImplementedError

    def obs_u_adj(self, z):
        raise NotImplementedError

    def obs_theta(self, theta):
        return np.zeros(self.n_obs)

    def obs_theta_adj(self, z):
        return np.zeros(self.dim_theta)

    def observe(self, u, theta):
        return self.obs_u(u) + self.obs_theta(theta)

    def state(self, theta):
        return self.S(theta) + self.s0()

    def parameter(self, u):
        return self.R(u) + self.r0()

    def diagonal_coupling(self, c) -> "Coupling":
        """Coupling ``C2 theta = c * theta`` (broadcast over time) with its adjoint."""
        c = np.asarray(c, dtype=float)
        ou, ot = self.omega_u, self.omega_theta
        shape = self.shape_u

        def fwd(theta):
            return np.broadcast_to(c * theta, shape).copy()

        def adj(u):
            v = ou * c * u
            return (v.reshape(-1, ot.size).sum(axis=0)) / ot

        return Coupling(fwd, adj)


def _obs_matrix(obs, d):
    if obs is None:
        return None
    p = np.asarray(obs, dtype=float)
    if p.ndim != 2 or p.shape[1] != d:
        raise ValueError(f"observation matrix must have {d} columns, got shape {p.shape}")
    return p


class InverseSourceProblem(LinearAaoProblem):
    """``-A u + theta + f = 0`` with observation ``P u``.

    Parameters
    ----------
    lap : DiagonalizedLaplacian
    obs_modal : ndarray, optional
        Observation matrix acting on modal coefficients; ``None`` means full
        observation of ``u`` in L2.
    forcing : ndarray, optional
        Modal coefficients of ``f``.
    """

    name = "inverse_source"

    def __init__(self, lap: DiagonalizedLaplacian, obs_modal=None, forcing=None):
        self.lap = lap
        self.gamma = lap.eigenvalues
        self.omega_u = self.gamma ** 2
        self.omega_theta = np.ones_like(self.gamma)
        self.P = _obs_matrix(obs_modal, lap.dim)
        self.f = np.zeros(lap.dim) if forcing is None else np.asarray(forcing, dtype=float)

    @property
    def n_obs(self) -> int:
        return self.lap.dim if self.P is None else self.P.shape[0]

    def S(self, theta):
        return np.asarray(theta) / self.gamma

    def S_adj(self, v):
        return self.gamma * np.asarray(v)

    def s0(self):
        return self.f / self.gamma

    def R(self, u):
        return self.gamma * np.asarray(u)

    def R_adj(self, eta):
        return np.asarray(eta) / self.gamma

    def r0(self):
        return -self.f

    def obs_u(self, u):
        u = np.asarray(u)
        return u.copy() if self.P is None else self.P @ u

    def obs_u_adj(self, z):
        z = np.asarray(z)
        pz = z if self.P is None else self.P.T @ z
        return pz / self.gamma ** 2


class BackwardsHeatProblem(LinearAaoProblem):
    """``(d/dt + A) u + A theta = f``, ``u(0) = 0``, observation ``P (u(T) + theta)``.

    The state is the generator ``r = (d/dt + A) u`` on the dG(0) cells (see
    :mod:`aaobayes.aao_bh`); ``U0`` then has weights ``w_k / gamma``.
    """

    name = "backwards_heat"

    def __init__(self, lap: DiagonalizedLaplacian, grid: TimeGrid, obs_modal=None, forcing=None):
        self.lap = lap
        self.grid = grid
        self.op = BhOperator(lap, grid)
        g = lap.eigenvalues
        self.gamma = g
        self.w = grid.weights[:, None]
        self.omega_u = self.w / g[None, :]
        self.omega_theta = g.copy()
        self.P = _obs_matrix(obs_modal, lap.dim)
        shape = (grid.size, lap.dim)
        self.f = np.zeros(shape) if forcing is None else np.broadcast_to(forcing, shape).copy()

    @property
    def n_obs(self) -> int:
        return self.lap.dim if self.P is None else self.P.shape[0]

    def S(self, theta):
        return np.broadcast_to(-self.gamma * np.asarray(theta), self.shape_u).copy()

    def S_adj(self, v):
        return -np.sum(self.w * v, axis=0) / self.gamma

    def s0(self):
        return self.f.copy()

    def R(self, u):
        return -np.sum(self.w * u, axis=0) / (self.grid.T * self.gamma)

    def R_adj(self, eta):
        return np.broadcast_to(-self.gamma * np.asarray(eta) / self.grid.T, self.shape_u).copy()

    def r0(self):
        return np.sum(self.w * self.f, axis=0) / (self.grid.T * self.gamma)

    def final_state(self, u):
        return np.sum(self.op.E * u, axis=0)

    def _p(self, v):
        return v if self.P is None else self.P @ v

    def _pt(self, z):
        return np.asarray(z) if self.P is None else self.P.T @ z

    def obs_u(self, u):
        return self._p(self.final_state(u))

    def obs_u_adj(self, z):
        return self.gamma * self.op.E / self.w * self._pt(z)[None, :]

    def obs_theta(self, theta):
        return self._p(np.asarray(theta))

    def obs_theta_adj(self, z):
        return self._pt(z) / self.gamma

    def state_values(self, u):
        """Modal state values ``u(t_k)`` from the generator."""
        return np.einsum("jkn,kn->jn", self.op.propagator, u)


# -- configuration -----------------------------------------------------------

class Coupling(NamedTuple):
    apply: Callable
    adjoint: Callable


def _as_mult(c):
    if c is None:
        return None
    if callable(c):
        return c
    arr = np.asarray(c, dtype=float)
    return lambda v: arr * v


@dataclass
class CostConfig:
    """Regularised data-misfit functional.

    ``C1`` and ``C3`` are modal multipliers (arrays) or callables; ``C2`` is a
    :class:`Coupling` or ``None``.  ``sigma`` is the noise shape matrix
    (noise covariance ``delta^2 sigma``), identity by default.
    """

    alpha: float
    data: np.ndarray
    C1: object = None
    C3: object = None
    C2: Coupling | None = None
    sigma: np.ndarray | None = None
    _chol: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        self.data = np.asarray(self.data, dtype=float)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != (self.data.size,) * 2:
                raise ValueError("noise matrix does not match the data size")
            self._chol = cho_factor(s, lower=True)
        self._c1 = _as_mult(self.C1)
        self._c3 = _as_mult(self.C3)

    def noise_precision(self, r):
        return r if self._chol is None else cho_solve(self._chol, r)

    def c1(self, u):
        return np.zeros_like(u) if self._c1 is None else self._c1(u)

    def c3(self, t):
        return np.zeros_like(t) if self._c3 is None else self._c3(t)

    def c2(self, t, shape):
        return np.zeros(shape) if self.C2 is None else self.C2.apply(t)

    def c2_adj(self, u, n):
        return np.zeros(n) if self.C2 is None else self.C2.adjoint(u)


# -- reduced functionals -----------------------------------------------------

def _penalty(u, theta, cfg: CostConfig, pb: LinearAaoProblem) -> float:
    return (pb.inner_u(u, cfg.c1(u)) + 2.0 * pb.inner_u(u, cfg.c2(theta, pb.shape_u))
            + pb.inner_theta(theta, cfg.c3(theta)))


def _joint_cost(u, theta, cfg, pb) -> float:
    r = pb.observe(u, theta) - cfg.data
    return 0.5 * float(r @ cfg.noise_precision(r)) + 0.5 * cfg.alpha * _penalty(u, theta, cfg, pb)


def _partials(u, theta, cfg, pb, data):
    """Riesz representers of dJ/du and dJ/dtheta."""
    r = pb.observe(u, theta) - data
    a = cfg.noise_precision(r)
    gu = pb.obs_u_adj(a) + cfg.alpha * (cfg.c1(u) + cfg.c2(theta, pb.shape_u))
    gt = pb.obs_theta_adj(a) + cfg.alpha * (cfg.c2_adj(u, pb.dim_theta) + cfg.c3(theta))
    return gu, gt


def cost_theta(theta, cfg: CostConfig, pb: LinearAaoProblem) -> float:
    theta = np.asarray(theta, dtype=float)
    return _joint_cost(pb.state(theta), theta, cfg, pb)


def cost_u(u, cfg: CostConfig, pb: LinearAaoProblem) -> float:
    u = np.asarray(u, dtype=float)
    return _joint_cost(u, pb.parameter(u), cfg, pb)


def reduced_gradient_theta(theta, cfg: CostConfig, pb: LinearAaoProblem):
    theta = np.asarray(theta, dtype=float)
    gu, gt = _partials(pb.state(theta), theta, cfg, pb, cfg.data)
    return pb.S_adj(gu) + gt


def reduced_hessian_theta_action(theta_hat, cfg: CostConfig, pb: LinearAaoProblem):
    th = np.asarray(theta_hat, dtype=float)
    gu, gt = _partials(pb.S(th), th, cfg, pb, np.zeros_like(cfg.data))
    return pb.S_adj(gu) + gt


def reduced_gradient_u(u, cfg: CostConfig, pb: LinearAaoProblem):
    u = np.asarray(u, dtype=float)
    gu, gt = _partials(u, pb.parameter(u), cfg, pb, cfg.data)
    return gu + pb.R_adj(gt)


def reduced_hessian_u_action(u_hat, cfg: CostConfig, pb: LinearAaoProblem):
    uh = np.asarray(u_hat, dtype=float)
    gu, gt = _partials(uh, pb.R(uh), cfg, pb, np.zeros_like(cfg.data))
    return gu + pb.R_adj(gt)


# -- posterior ---------------------------------------------------------------

@dataclass
class PosteriorModel:
    """Gaussian posterior of the reduced variable.

    ``mean`` is the MAP point; the covariance operator is ``delta^2 H^{-1}``
    on the weighted space of the reduced variable.  The dense Hessian and its
    eigendecomposition are built on first use and then cached.
    """

    mean: np.ndarray
    variable: str
    problem: LinearAaoProblem
    cfg: CostConfig
    delta: float
    cg: CGResult | None = None
    gradient_norm: float = 0.0
    _eig: tuple | None = field(default=None, init=False, repr=False)

    @property
    def weights(self):
        return self.problem.omega_theta if self.variable == "theta" else self.problem.omega_u

    def hessian_action(self, v):
        f = reduced_hessian_theta_action if self.variable == "theta" else reduced_hessian_u_action
        return f(v, self.cfg, self.problem)

    def _whitened_hessian(self):
        if self._eig is None:
            shape = self.mean.shape
            n = self.mean.size
            sw = np.sqrt(self.weights).ravel()
            cols = np.empty((n, n))
            for j in range(n):
                e = np.zeros(n)
                e[j] = 1.0 / sw[j]
                cols[:, j] = sw * self.hessian_action(e.reshape(shape)).ravel()
            h = 0.5 * (cols + cols.T)
            w, q = sym_eig(h)
            if w[0] < -1e-8 * max(1.0, abs(w[-1])):
                raise ValueError(f"posterior precision is indefinite (eigenvalue {w[0]:.3e})")
            self._eig = (np.clip(w, np.finfo(float).tiny, None), q, sw)
        return self._eig

    def hessian_eigenvalues(self) -> np.ndarray:
        return self._whitened_hessian()[0]

    def covariance_action(self, v):
        w, q, sw = self._whitened_hessian()
        x = (sw * np.asarray(v, dtype=float).ravel())
        y = q @ ((q.T @ x) / w)
        return (self.delta ** 2 * y / sw).reshape(self.mean.shape)

    def spread(self) -> float:
        """Trace of the posterior covariance operator."""
        return float(self.delta ** 2 * np.sum(1.0 / self.hessian_eigenvalues()))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count == 0:
            return np.empty((0,) + self.mean.shape)
        w, q, sw = self._whitened_hessian()
        z = rng.standard_normal((count, w.size))
        draws = (z / np.sqrt(w)) @ q.T * self.delta / sw
        return self.mean + draws.reshape((count,) + self.mean.shape)


def map_estimate(cfg: CostConfig, pb: LinearAaoProblem, variable: str = "theta",
                 tol: float = 1e-8, max_iter: int = 500, delta: float = 0.0) -> PosteriorModel:
    """MAP point by CG on ``H x = -g(0)`` in the weighted inner product."""
    if variable == "theta":
        grad, hess, w = reduced_gradient_theta, reduced_hessian_theta_action, pb.omega_theta
        x0 = np.zeros(pb.dim_theta)
    elif variable == "u":
        grad, hess, w = reduced_gradient_u, reduced_hessian_u_action, pb.omega_u
        x0 = np.zeros(pb.shape_u)
    else:
        raise ValueError("variable must be 'theta' or 'u'")
    ip = InnerProduct(lambda v: w * v)
    rhs = -grad(x0, cfg, pb)
    res = conjugate_gradient(lambda v: hess(v, cfg, pb), rhs, ip=ip, tol=tol, max_iter=max_iter)
    g = grad(res.x, cfg, pb)
    gn = ip.norm(g) / max(ip.norm(rhs), np.finfo(float).tiny)
    return PosteriorModel(res.x, variable, pb, cfg, float(delta), res, float(gn))


class DirectPosterior(NamedTuple):
    """Posterior in explicit coordinates: mean vector and covariance matrix."""

    mean: np.ndarray
    cov_matrix: np.ndarray
    mean_map: np.ndarray  # data -> mean

    def covariance_action(self, v):
        return self.cov_matrix @ v

    def spread(self, weights=None) -> float:
        if weights is None:
            return float(np.trace(self.cov_matrix))
        return float(np.sum(np.asarray(weights) * np.diag(self.cov_matrix)))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if count == 0:
            return np.empty((0, self.mean.size))
        w, q = np.linalg.eigh(0.5 * (self.cov_matrix + self.cov_matrix.T))
        if w.min() < -1e-8 * max(1.0, abs(w).max()):
            raise ValueError(f"posterior covariance is indefinite (eigenvalue {w.min():.3e})")
        root = q * np.sqrt(np.clip(w, 0.0, None))
        return self.mean + rng.standard_normal((count, w.size)) @ root.T


def posterior_direct(g_matrix, c0_sqrt, sigma, alpha: float, delta: float, data,
                     prior_mean=None) -> DirectPosterior:
    """Gaussian posterior from dense matrices.

    With ``B = Sigma^{-1/2} G C0^{1/2}`` and ``H = B* B``:

        mean = m + C0^{1/2} (alpha I + H)^{-1} B* Sigma^{-1/2} (y - G m),
        cov  = delta^2 C0^{1/2} (alpha I + H)^{-1} C0^{1/2}*.
    """
    g = np.atleast_2d(np.asarray(g_matrix, dtype=float))
    c = np.atleast_2d(np.asarray(c0_sqrt, dtype=float))
    m_obs, n = g.shape
    if c.shape[0] != n:
        raise ValueError(f"prior root has {c.shape[0]} rows, forward matrix has {n} columns")
    y = np.asarray(data, dtype=float)
    if y.shape != (m_obs,):
        raise ValueError(f"data has shape {y.shape}, expected ({m_obs},)")
    s = np.eye(m_obs) if sigma is None else np.asarray(sigma, dtype=float)
    if s.shape != (m_obs, m_obs):
        raise ValueError("noise matrix does not match the data size")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    ws, qs = np.linalg.eigh(s)
    s_isqrt = (qs / np.sqrt(ws)) @ qs.T
    b = s_isqrt @ g @ c
    k = c.shape[1]
    # (alpha I + B* B)^{-1} through the thin SVD of B; the complement of the
    # right singular vectors is handled exactly instead of through round-off
    us, sv, vt = np.linalg.svd(b, full_matrices=False)
    inv = (vt.T / (alpha + sv ** 2)) @ vt + (np.eye(k) - vt.T @ vt) / alpha
    inv = 0.5 * (inv + inv.T)
    mean_map = c @ (vt.T * (sv / (alpha + sv ** 2))) @ us.T @ s_isqrt
    m0 = np.zeros(n) if prior_mean is None else np.asarray(prior_mean, dtype=float)
    mean = m0 + mean_map @ (y - g @ m0)
    cov = delta ** 2 * (c @ inv @ c.T)
    return DirectPosterior(mean, 0.5 * (cov + cov.T), mean_map)


def sample_posterior(p, seed: int, count: int):
    return p.sample(np.random.default_rng(seed), count)


# -- squared posterior contraction --------------------------------------------

class SpcReport(NamedTuple):
    bias2: float
    variance: float
    variance_se: float
    spread: float
    spc: float  # Monte Carlo estimate of E E ||x* - x||^2
    spc_se: float
    n_draws: int
    bound: float | None = None

    @property
    def total(self) -> float:
        return self.bias2 + self.variance + self.spread


def spc_components(x_true, g_matrix, c0_sqrt, alpha: float, delta: float, n_draws: int = 200,
                   seed: int = 0, sigma=None, weights=None, bound: float | None = None) -> SpcReport:
    """Monte Carlo squared posterior contraction and its three parts.

    Data are ``G x* + delta Sigma^{1/2} eta``.  For each noise draw one
    posterior sample is taken, so ``spc`` estimates the double expectation
    independently of the decomposition.  Norms use the optional diagonal
    ``weights``.
    """
    x_true = np.asarray(x_true, dtype=float)
    g = np.atleast_2d(np.asarray(g_matrix, dtype=float))
    m_obs = g.shape[0]
    s = np.eye(m_obs) if sigma is None else np.asarray(sigma, dtype=float)
    wts = np.ones_like(x_true) if weights is None else np.asarray(weights, dtype=float)
    rng = np.random.default_rng(seed)
    clean = g @ x_true
    post = posterior_direct(g, c0_sqrt, s, alpha, delta, clean)
    ls = np.linalg.cholesky(s)
    mean_clean = post.mean
    bias2 = float(np.sum(wts * (x_true - mean_clean) ** 2))
    spread = post.spread(wts)
    if n_draws < 2:
        raise ValueError("need at least two noise draws")
    noise = delta * rng.standard_normal((n_draws, m_obs)) @ ls.T
    means = mean_clean + noise @ post.mean_map.T
    dev = np.sum(wts * (means - mean_clean) ** 2, axis=1)
    if delta > 0:
        xs = means + post.sample(rng, n_draws) - post.mean
    else:
        xs = means
    err = np.sum(wts * (xs - x_true) ** 2, axis=1)
    se = lambda a: float(a.std(ddof=1) / np.sqrt(a.size))
    return SpcReport(bias2, float(dev.mean()), se(dev), spread, float(err.mean()), se(err),
                     n_draws, bound)


def spc_bound_trivial_prior(h_spectrum, alpha: float, delta: float, source_exponent: float,
                            m_bar: float = 1.0) -> float:
    """Spectral bound for the trivial prior ``C0 = G* G`` (``psi(t) = sqrt(t)``).

    Evaluates ``m_bar^2 max_j |s_alpha(h_j) phi(f0^2(h_j))|
    + delta^2 sum_j f0^2(h_j) / (alpha + h_j)`` with ``s_alpha(t) =
    alpha / (alpha + t)``, ``f0(s) = s^{1/4}`` and ``phi(t) = t^p``.
    """
    h = np.asarray(h_spectrum, dtype=float)
    if h.size == 0 or np.any(h <= 0) or not np.all(np.isfinite(h)):
        raise ValueError("spectrum entries must be positive and finite")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    f0sq = np.sqrt(h)
    bias = np.max(np.abs(alpha / (alpha + h) * f0sq ** source_exponent))
    trace = np.sum(f0sq / (alpha + h))
    return float(m_bar ** 2 * bias + delta ** 2 * trace)
