"""Gaussian priors on the joint unknown ``(u, theta)`` and link diagnostics.

All covariances here are diagonal in the eigenbasis of the spatial
operator.  A field prior is described by

* ``sigma``: eigenvalues of the covariance *operator* on its ambient space,
* ``omega``: modal weights of that ambient inner product
  (``<a, b> = sum(omega * a_modal * b_modal)``),

so the modal coefficients of a draw have variance ``sigma / omega``.  For
example the identity covariance on ``U0`` (weights ``w_k / gamma``) yields
generators with coefficient variance ``gamma / w_k``.

Joint priors are block diagonal.  :meth:`JointPrior.penalty` converts them
into the multipliers ``C1, C3`` of the regularisation functional
``<u, C1 u>_U + <theta, C3 theta>_X`` for a given problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .aao_bh import BhBlockVector, BhOperator, TimeGrid
from .laplacian import DiagonalizedLaplacian

__all__ = [
    "UnsupportedOperation",
    "FieldPrior",
    "JointPrior",
    "DensePrior",
    "HeuristicFullPrior",
    "LinkCheckReport",
    "smoothness_prior",
    "is_joint_prior",
    "semigroup_state_prior",
    "bh_sampled_prior",
    "heuristic_bh_prior",
    "trivial_prior",
    "sample_prior",
    "check_link_condition",
]


class UnsupportedOperation(NotImplementedError):
    pass


@dataclass(frozen=True)
class FieldPrior:
    """Gaussian measure on a (space-time) field, diagonal in modal coordinates.

    Parameters
    ----------
    lap : DiagonalizedLaplacian
        Spatial backend; arrays act on their last axis.
    mean : ndarray
        Mean in native coordinates, shape ``(d,)`` or ``(N + 1, d)``.
    sigma : ndarray
        Covariance eigenvalues, broadcastable to the modal shape.
    omega : ndarray
        Ambient inner-product weights, broadcastable to the modal shape.
    label : str
        Construction name, recorded in manifests.
    """

    lap: DiagonalizedLaplacian
    mean: np.ndarray
    sigma: np.ndarray
    omega: np.ndarray
    label: str = "field"

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), mean.shape).copy()
        omega = np.broadcast_to(np.asarray(self.omega, dtype=float), mean.shape).copy()
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("covariance eigenvalues must be finite and nonnegative")
        if np.any(omega <= 0):
            raise ValueError("inner-product weights must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "omega", omega)

    @property
    def shape(self):
        return self.mean.shape

    def _apply(self, x, factors):
        return self.lap.from_modal(factors * self.lap.to_modal(x))

    def cov(self, x):
        return self._apply(x, self.sigma)

    def sqrt(self, x):
        return self._apply(x, np.sqrt(self.sigma))

    def precision(self, x):
        if np.any(self.sigma == 0):
            raise ZeroDivisionError("precision undefined for a degenerate covariance")
        return self._apply(x, 1.0 / self.sigma)

    def inner(self, a, b) -> float:
        return float(np.sum(self.omega * self.lap.to_modal(a) * self.lap.to_modal(b)))

    def coefficient_variance(self) -> np.ndarray:
        """Variance of each modal coefficient of a draw."""
        return self.sigma / self.omega

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        z = rng.standard_normal((count,) + self.shape)
        return self.mean + self.lap.from_modal(np.sqrt(self.coefficient_variance()) * z)


@dataclass(frozen=True)
class JointPrior:
    """Block-diagonal prior ``diag(C_u, C_theta)``."""

    u: FieldPrior
    theta: FieldPrior
    label: str = "joint"
    info: dict = field(default_factory=dict)

    @property
    def mean(self):
        return self.u.mean, self.theta.mean

    def cov(self, x):
        return self.u.cov(x[0]), self.theta.cov(x[1])

    def sqrt(self, x):
        return self.u.sqrt(x[0]), self.theta.sqrt(x[1])

    def precision(self, x):
        return self.u.precision(x[0]), self.theta.precision(x[1])

    def inner(self, a, b) -> float:
        return self.u.inner(a[0], b[0]) + self.theta.inner(a[1], b[1])

    def sample(self, rng: np.random.Generator, count: int):
        us = self.u.sample(rng, count)
        ts = self.theta.sample(rng, count)
        return [(us[i], ts[i]) for i in range(count)]

    def penalty(self, omega_u, omega_theta, use_state_block: bool = True):
        """Multipliers ``(C1, C3)`` of the regularisation in the model spaces.

        ``<u, C_u^{-1} u>`` on the ambient space equals ``<u, C1 u>_U`` with
        ``C1 = omega_ambient / (omega_U sigma)``, and likewise for ``theta``.
        With ``use_state_block=False`` the state term is dropped (``C1 = 0``).
        """
        def conv(p: FieldPrior, omega_model):
            with np.errstate(divide="ignore"):
                c = p.omega / (np.broadcast_to(omega_model, p.shape) * p.sigma)
            if not np.all(np.isfinite(c)):
                raise ZeroDivisionError(f"prior block {p.label!r} has a degenerate covariance")
            return c

        c1 = conv(self.u, omega_u) if use_state_block else np.zeros(self.u.shape)
        return c1, conv(self.theta, omega_theta)


def smoothness_prior(lap: DiagonalizedLaplacian, kappa: float, gamma: float, n_power: int = 1,
                     mean=None) -> FieldPrior:
    """Covariance ``(kappa + gamma A)^{-n}`` on L2.

    On the finite-element backend this is the operator whose matrix is
    ``((kappa M + gamma K)^{-1} M)^n``; for ``n = 1`` it is the covariance
    usually written ``(kappa M + gamma K)^{-1}``.
    """
    if kappa < 0 or gamma < 0 or (kappa == 0 and gamma == 0):
        raise ValueError("need kappa >= 0, gamma >= 0, not both zero")
    if n_power not in (1, 2):
        raise ValueError("n_power must be 1 or 2")
    sigma = (kappa + gamma * lap.eigenvalues) ** (-float(n_power))
    mean = np.zeros(lap.dim) if mean is None else mean
    return FieldPrior(lap, mean, sigma, np.ones(lap.dim),
                      label=f"smoothness(kappa={kappa}, gamma={gamma}, n={n_power})")


def is_joint_prior(lap: DiagonalizedLaplacian, kappa_p: float = 1e-2, gamma_p: float = 35.0,
                   kappa_s: float = 1e-2, gamma_s: float = 35.0, mean_theta=None,
                   n_power: int = 1) -> JointPrior:
    """Block-diagonal smoothness prior for the inverse source problem.

    Both blocks live on L2.  The state mean solves the forward problem with
    the parameter mean, ``m_u = A^{-1} m_theta``.
    """
    pt = smoothness_prior(lap, kappa_p, gamma_p, n_power, mean=mean_theta)
    mu = lap.power(pt.mean, -1.0)
    pu = smoothness_prior(lap, kappa_s, gamma_s, n_power, mean=mu)
    return JointPrior(pu, pt, label="is-smoothness",
                      info=dict(kappa_p=kappa_p, gamma_p=gamma_p, kappa_s=kappa_s, gamma_s=gamma_s,
                                n_power=n_power))


def semigroup_state_prior(cp: FieldPrior, times, forcing=None) -> FieldPrior:
    """Law of ``u(t_i) = exp(-t_i A) theta + int_0^{t_i} exp(-(t_i - s) A) f ds``, theta ~ cp.

    The covariance is block diagonal in time with blocks
    ``exp(-t_i A) C_p exp(-t_i A)``; the forcing (a time-constant field) only
    shifts the mean.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be nonnegative and ascending")
    lap = cp.lap
    g = lap.eigenvalues
    decay = np.exp(-np.outer(t, g))
    mean_c = decay * lap.to_modal(cp.mean)
    if forcing is not None:
        fc = lap.to_modal(np.asarray(forcing, dtype=float))
        mean_c = mean_c + (-np.expm1(-np.outer(t, g)) / g) * fc
    sigma = decay ** 2 * cp.sigma
    omega = np.broadcast_to(cp.omega, sigma.shape)
    return FieldPrior(lap, lap.from_modal(mean_c), sigma, omega, label="semigroup-state")


def bh_sampled_prior(lap: DiagonalizedLaplacian, grid: TimeGrid, kappa: float = 1.5,
                     gamma: float = 0.5) -> JointPrior:
    """``diag(C_s, C_p)`` with ``C_p = (kappa + gamma A)^{-1}`` and the semigroup state block."""
    cp = smoothness_prior(lap, kappa, gamma, 1)
    cs = semigroup_state_prior(cp, grid.t)
    return JointPrior(cs, cp, label="bh-semigroup", info=dict(kappa=kappa, gamma=gamma))


def heuristic_bh_prior(op: BhOperator, diagonal_only: bool = True):
    """Prior built from the factor whose norm reproduces ``||G x||``.

    ``diagonal_only=True`` keeps the diagonal blocks: the identity on ``U0``
    for the state and ``A^{1/2}`` (covariance on L2) for the parameter.
    Otherwise a :class:`HeuristicFullPrior` is returned, which supports
    operator applications but no square root.
    """
    if not diagonal_only:
        return HeuristicFullPrior(op)
    lap, grid = op.lap, op.grid
    g = lap.eigenvalues
    wu = grid.weights[:, None] / g[None, :]
    pu = FieldPrior(lap, np.zeros((grid.size, lap.dim)), np.ones_like(wu), wu, label="identity-U0")
    pt = FieldPrior(lap, np.zeros(lap.dim), np.sqrt(g), np.ones(lap.dim), label="A^(1/2)")
    return JointPrior(pu, pt, label="bh-heuristic-diagonal")


class HeuristicFullPrior:
    """Non-diagonal link-motivated operator for the backwards heat problem.

    Acts on ``(u, theta)`` in ``U0 x H^1_0`` with ``u`` given by its
    generator.  ``apply_psi`` is ``[[I, I - exp(-A t)], [A^{-1} delta_T + B,
    A^{-1/2}]]`` with ``B u = int_0^T u dt``; it splits as
    ``diag(I, A^{-1/2}) apply_factor + apply_remainder``.
    """

    label = "bh-heuristic-full"

    def __init__(self, op: BhOperator):
        self.op = op

    def apply_psi(self, x):
        rate, theta = x
        lap = self.op.lap
        ru = np.asarray(rate) + lap.power(theta, 1.0)[None, :]
        th = (lap.power(self.op.final_value(rate), -1.0) + self.op.time_integral(rate)
              + lap.power(theta, -0.5))
        return BhBlockVector(ru, th)

    def apply_factor(self, x):
        rate, theta = x
        lap = self.op.lap
        ru = np.asarray(rate) + lap.power(theta, 1.0)[None, :]
        th = lap.power(self.op.final_value(rate) + theta, -0.5)
        return BhBlockVector(ru, th)

    def apply_remainder(self, x):
        rate, theta = x
        lap = self.op.lap
        th = self.op.time_integral(rate) + lap.power(theta, -0.5) - lap.power(theta, -1.0)
        return BhBlockVector(np.zeros_like(np.asarray(rate, dtype=float)), th)

    def remainder_ratio(self, x) -> float:
        """``||R x|| / ||G x||``; a diagnostic only."""
        return self.op.domain_norm(self.apply_remainder(x)) / self.op.range_norm(self.op.apply(x))

    def cov(self, x):
        return self.apply_psi(x)

    def sqrt(self, x):
        raise UnsupportedOperation("the full heuristic operator has no square root")

    def sample(self, rng, count):
        raise UnsupportedOperation("the full heuristic operator is not a covariance")


@dataclass(frozen=True)
class DensePrior:
    """Gaussian prior with a dense covariance matrix in given coordinates."""

    mean: np.ndarray
    cov_matrix: np.ndarray
    label: str = "dense"

    def __post_init__(self):
        c = np.asarray(self.cov_matrix, dtype=float)
        c = 0.5 * (c + c.T)
        w, q = np.linalg.eigh(c)
        if w.min() < -1e-8 * max(1.0, abs(w).max()):
            raise ValueError(f"covariance is indefinite (eigenvalue {w.min():.3e})")
        w = np.clip(w, 0.0, None)
        object.__setattr__(self, "cov_matrix", c)
        object.__setattr__(self, "_sqrt", (q * np.sqrt(w)) @ q.T)
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))

    def cov(self, x):
        return self.cov_matrix @ x

    def sqrt(self, x):
        return self._sqrt @ x

    @property
    def sqrt_matrix(self):
        return self._sqrt

    def precision(self, x):
        return np.linalg.solve(self.cov_matrix, x)

    def sample(self, rng, count):
        z = rng.standard_normal((count, self.mean.size))
        return self.mean + z @ self._sqrt.T


def trivial_prior(g_matrix, mean=None) -> DensePrior:
    """``C0 = G* G`` for a dense forward matrix in orthonormal coordinates."""
    g = np.asarray(g_matrix, dtype=float)
    mean = np.zeros(g.shape[1]) if mean is None else mean
    return DensePrior(mean, g.T @ g, label="trivial")


def sample_prior(p, seed: int, count: int):
    """``count`` draws ``mean + C^{1/2} xi`` from a fixed seed."""
    return p.sample(np.random.default_rng(seed), count)


# -- link condition ----------------------------------------------------------

class LinkCheckReport(NamedTuple):
    n_samples: int
    sample_ratios: np.ndarray
    probe_ratios: np.ndarray
    lower: float  # empirical m_low
    upper: float  # empirical m_up
    diverges: bool
    skipped: int

    def rows(self):
        for i, r in enumerate(self.sample_ratios):
            yield "sample", i, float(r)
        for i, r in enumerate(self.probe_ratios):
            yield "mode", i, float(r)


def check_link_condition(psi_norm: Callable, g_norm: Callable, sampler: Callable[[int], Sequence],
                         n_samples: int = 100, probes: Sequence = (), window: int = 10,
                         factor: float = 10.0) -> LinkCheckReport:
    """Empirical constants of ``m_low ||psi(C0) x|| <= ||G x|| <= m_up ||psi(C0) x||``.

    Parameters
    ----------
    psi_norm, g_norm : callable
        ``x -> ||psi(C0) x||`` and ``x -> ||Sigma^{-1/2} G x||``.
    sampler : callable
        ``n -> list of n random elements``.
    probes : sequence
        Elements ordered by increasing mode index (e.g. single eigenmodes).
    window, factor : int, float
        Divergence is flagged when the largest ratio over the last ``window``
        probes exceeds ``factor`` times the largest over the first ``window``.

    Elements with ``||psi(C0) x|| = 0`` are skipped and counted.
    """
    skipped = 0

    def ratios(xs):
        nonlocal skipped
        out = []
        for x in xs:
            den = psi_norm(x)
            if den == 0.0:
                skipped += 1
                continue
            out.append(g_norm(x) / den)
        return np.asarray(out, dtype=float)

    rs = ratios(sampler(n_samples))
    rp = ratios(probes)
    both = np.concatenate([rs, rp])
    if both.size == 0:
        raise ValueError("no usable samples")
    diverges = False
    if rp.size >= 2 * window:
        diverges = bool(rp[-window:].max() > factor * rp[:window].max())
    return LinkCheckReport(rs.size, rs, rp, float(both.min()), float(both.max()), diverges, skipped)
