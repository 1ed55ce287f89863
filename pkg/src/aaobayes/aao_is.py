"""All-at-once operator of the inverse source problem for the Poisson equation.

The pair ``x = (u, theta)`` with ``u`` in ``U = H^2 cap H^1_0`` and ``theta``
in ``L^2`` is mapped to the model residual and the full observation,

    G(u, theta) = (A u - theta, u),

with ``A = -Laplace``.  ``U`` carries ``<v, w>_U = <A v, A w>``, so that
``T(u, theta) = (A u, theta)`` is unitary onto ``L^2 x L^2`` and ``G*G`` is
unitarily equivalent to

    [[I + A^{-2}, -I], [-I, I]].

Per eigenvalue ``gamma`` of ``A`` this 2x2 block has eigenvalues solving
``lambda^2 - (2 + mu) lambda + mu = 0`` with ``mu = gamma^{-2}``.

Every routine takes a :class:`~aaobayes.laplacian.DiagonalizedLaplacian`, so
the same code runs on the exact sine basis and on the finite-element pencil.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .fem import Mesh, assemble_mass, assemble_stiffness
from .laplacian import DiagonalizedLaplacian
from .linalg import DecompositionError, gen_sym_eig, sym_eig

__all__ = [
    "IsBlockVector",
    "IsOperator",
    "analytic_eigenvalue_pair",
    "discrete_spectrum",
    "label_branches",
]


class IsBlockVector(NamedTuple):
    u: np.ndarray
    theta: np.ndarray


class IsOperator:
    """Block operator ``[[A, -I], [I, 0]]`` and its adjoint.

    All vectors are in the native coordinates of ``lap``.
    """

    def __init__(self, lap: DiagonalizedLaplacian):
        self.lap = lap
        self.gamma = lap.eigenvalues

    @property
    def dim(self) -> int:
        return self.lap.dim

    def apply(self, x) -> tuple[np.ndarray, np.ndarray]:
        u, theta = x
        return self.lap.power(u, 1.0) - theta, np.array(u, dtype=float)

    def adjoint(self, y) -> IsBlockVector:
        y1, y2 = y
        g = self.gamma
        c1 = self.lap.to_modal(y1)
        c2 = self.lap.to_modal(y2)
        return IsBlockVector(self.lap.from_modal(c1 / g + c2 / g ** 2), -np.array(y1, dtype=float))

    def normal(self, x) -> IsBlockVector:
        """``G* G x``."""
        return self.adjoint(self.apply(x))

    def transform(self, x):
        """The unitary map ``(u, theta) -> (A u, theta)``."""
        u, theta = x
        return self.lap.power(u, 1.0), np.array(theta, dtype=float)

    def inverse_transform(self, z) -> IsBlockVector:
        f, g = z
        return IsBlockVector(self.lap.power(f, -1.0), np.array(g, dtype=float))

    def transformed_normal(self, z):
        """``[[I + A^{-2}, -I], [-I, I]]`` applied to ``(f, g)`` in L2 x L2."""
        f, g = z
        return f + self.lap.power(f, -2.0) - g, g - f

    # inner products
    def domain_inner(self, x, w) -> float:
        """``<x, w>`` in ``U x L2``."""
        cu, ct = self.lap.to_modal(x[0]), self.lap.to_modal(x[1])
        du, dt = self.lap.to_modal(w[0]), self.lap.to_modal(w[1])
        return float(np.sum(self.gamma ** 2 * cu * du) + np.sum(ct * dt))

    def range_inner(self, y, z) -> float:
        """``<y, z>`` in ``L2 x L2``."""
        return self.lap.inner(y[0], z[0]) + self.lap.inner(y[1], z[1])

    def domain_norm(self, x) -> float:
        return float(np.sqrt(self.domain_inner(x, x)))

    def range_norm(self, y) -> float:
        return float(np.sqrt(self.range_inner(y, y)))

    def transformed_matrix(self) -> np.ndarray:
        """Dense matrix of the transformed normal operator in modal coordinates.

        Unknowns are ordered ``(f_1..f_d, g_1..g_d)``.
        """
        d = self.dim
        mu = self.gamma ** -2.0
        eye = np.eye(d)
        return np.block([[np.diag(1.0 + mu), -eye], [-eye, eye]])


def analytic_eigenvalue_pair(mu):
    """Roots of ``lambda^2 - (2 + mu) lambda + mu = 0``.

    Parameters
    ----------
    mu : float or array_like
        Eigenvalue(s) of ``A^{-2}``, strictly positive.

    Returns
    -------
    lam1, lam2 : ndarray
        Upper and lower root.  ``lam2`` is computed as ``mu / lam1`` to avoid
        cancellation for small ``mu``.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(~np.isfinite(mu)) or np.any(mu <= 0):
        raise ValueError("mu must be positive and finite")
    lam1 = 1.0 + 0.5 * mu + np.sqrt(1.0 + 0.25 * mu ** 2)
    return lam1, mu / lam1


class DiscreteSpectrum(NamedTuple):
    eigenvalues: np.ndarray  # descending
    pencil_eigenvalues: np.ndarray  # ascending eigenvalues of (K, M)


def discrete_spectrum(mesh: Mesh, count: int = 500, method: str = "lapack") -> DiscreteSpectrum:
    """Largest ``count`` eigenvalues of ``diag(M, M) x = lambda A x``.

    ``A = [[B, B], [B, B + M]]`` with ``B = K M^{-1} K`` is the discrete
    inverse of the normal operator, so the eigenvalues are those of the
    discrete transformed operator.
    """
    M = assemble_mass(mesh)
    K = assemble_stiffness(mesh)
    d = M.shape[0]
    if count < 1 or count > 2 * d:
        raise ValueError(f"count must lie in [1, {2 * d}] for {d} interior nodes")
    B = K @ np.linalg.solve(M, K)
    B = 0.5 * (B + B.T)
    inv_normal = np.block([[B, B], [B, B + M]])
    mass = np.block([[M, np.zeros_like(M)], [np.zeros_like(M), M]])
    try:
        lam = gen_sym_eig(mass, inv_normal, method=method).eigenvalues
    except DecompositionError as exc:
        raise DecompositionError(f"singular pencil: {exc}") from exc
    pencil = gen_sym_eig(K, M, method=method).eigenvalues
    return DiscreteSpectrum(lam[::-1][:count], pencil)


def label_branches(eigenvalues, gamma):
    """Match each eigenvalue to the closest analytic root.

    Parameters
    ----------
    eigenvalues : array_like
        Computed eigenvalues.
    gamma : array_like
        Eigenvalues of the (discrete) Laplacian; ``mu = gamma^{-2}``.

    Returns
    -------
    branch : ndarray of str
        ``"upper"`` or ``"lower"``.
    mu_match : ndarray
        The ``mu`` whose root is closest.
    error : ndarray
        Absolute distance to that root.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    mu = np.asarray(gamma, dtype=float) ** -2.0
    l1, l2 = analytic_eigenvalue_pair(mu)
    roots = np.concatenate([l1, l2])
    labels = np.array(["upper"] * mu.size + ["lower"] * mu.size)
    mus = np.concatenate([mu, mu])
    order = np.argsort(roots)
    roots, labels, mus = roots[order], labels[order], mus[order]
    pos = np.clip(np.searchsorted(roots, lam), 1, roots.size - 1)
    left = np.abs(lam - roots[pos - 1])
    right = np.abs(lam - roots[pos])
    pick = np.where(left <= right, pos - 1, pos)
    return labels[pick], mus[pick], np.abs(lam - roots[pick])


def spectral_eigenvalues(lap: DiagonalizedLaplacian) -> np.ndarray:
    """Eigenvalues of the dense transformed matrix, descending."""
    return sym_eig(IsOperator(lap).transformed_matrix()).eigenvalues[::-1]
