"""All-at-once operator of the backwards heat problem.

Unknowns are the state ``u`` on ``(0, T)`` with ``u(0) = 0`` and the
initial value ``theta``.  The model ``u + theta`` solves the heat equation
started from ``theta``, and the observation is the final state, so

    G(u, theta) = ((d/dt + A) u + A theta, u(T) + theta).

Spaces and inner products:

* ``U0``: ``<u, v> = int_0^T <A^{-1/2}(d/dt + A)u, A^{-1/2}(d/dt + A)v> dt``,
* ``H^1_0`` for ``theta``: ``<A^{1/2} theta, A^{1/2} eta>``,
* ``L2(H^{-1}) x L2`` for the range.

Time discretisation
-------------------
A uniform grid ``t_k = k tau`` carries dG(0) cells ``[t_k - tau/2,
t_k + tau/2)`` clipped to ``[0, T]`` (half cells at both ends, weights
``tau (1/2, 1, ..., 1, 1/2)``).  A state in the discrete ``U0`` is stored
through its generator ``r = (d/dt + A) u``, which is piecewise constant on
these cells; the state itself follows by exact integration per mode
(:meth:`BhOperator.solve_forward`).  All time integrals of exponentials
against cell indicators are evaluated in closed form, so inner products and
adjoints are exact for the represented functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fem import Mesh, assemble_mass, assemble_stiffness
from .laplacian import DiagonalizedLaplacian
from .linalg import gen_sym_eig, matrix_function, sym_eig

__all__ = [
    "TimeGrid",
    "SpaceTimeField",
    "BhBlockVector",
    "BhOperator",
    "BhCubicCoefficients",
    "ComplexRootsError",
    "analytic_cubic_roots",
    "mode_matrix",
    "assemble_discrete_eigensystem",
    "discrete_spectrum_bh",
]


class TimeGrid:
    """Uniform grid ``0 = t_0 < ... < t_N = T`` with dG(0) half-end cells."""

    def __init__(self, T: float = 1.0, N: int = 4):
        if T <= 0:
            raise ValueError("final time must be positive")
        if int(N) < 1:
            raise ValueError("need at least one time step")
        self.T = float(T)
        self.N = int(N)
        self.tau = self.T / self.N
        self.t = np.linspace(0.0, self.T, self.N + 1)
        self.lo = np.maximum(self.t - 0.5 * self.tau, 0.0)
        self.hi = np.minimum(self.t + 0.5 * self.tau, self.T)
        self.weights = self.hi - self.lo

    def __repr__(self):
        return f"TimeGrid(T={self.T}, N={self.N})"

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and (self.T, self.N) == (other.T, other.N)

    def __hash__(self):
        return hash((self.T, self.N))

    @property
    def size(self) -> int:
        return self.N + 1

    def cell_exp_integral(self, gamma, t_end=None) -> np.ndarray:
        """``int_{cell_k} exp(-gamma (t_end - s)) ds`` for cells below ``t_end``.

        Returns an array of shape ``(N + 1, len(gamma))``; cells are clipped
        at ``t_end`` (default ``T``).
        """
        g = np.asarray(gamma, dtype=float)[None, :]
        t_end = self.T if t_end is None else float(t_end)
        hi = np.minimum(self.hi, t_end)[:, None]
        length = np.maximum(hi - self.lo[:, None], 0.0)
        return np.exp(-g * (t_end - hi)) * -np.expm1(-g * length) / g


@dataclass(frozen=True)
class SpaceTimeField:
    """One spatial field per time node, ``values[k]`` belongs to ``t_k``."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.size:
            raise ValueError(f"expected {self.grid.size} time slices, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("space-time values must be finite")
        object.__setattr__(self, "values", v)


class BhBlockVector(NamedTuple):
    """Pair ``(u, theta)`` with ``u`` stored through its generator ``rate``."""

    rate: np.ndarray  # (N + 1, d)
    theta: np.ndarray  # (d,)


class BhOperator:
    """Space-time block operator of the backwards heat problem.

    Parameters
    ----------
    lap : DiagonalizedLaplacian
        Spatial operator (spectral or finite element).
    grid : TimeGrid
        Time discretisation.
    """

    def __init__(self, lap: DiagonalizedLaplacian, grid: TimeGrid):
        self.lap = lap
        self.grid = grid
        self.gamma = lap.eigenvalues
        g = self.gamma
        self.E = grid.cell_exp_integral(g)  # (N + 1, d)
        # propagator[j, k] maps the generator on cell k to u(t_j)
        self.propagator = np.stack([grid.cell_exp_integral(g, tj) for tj in grid.t])

    @property
    def dim(self) -> int:
        return self.lap.dim

    # -- modal helpers -----------------------------------------------------
    def _m(self, v):
        return self.lap.to_modal(v)

    def _n(self, c):
        return self.lap.from_modal(c)

    def zero(self) -> BhBlockVector:
        return BhBlockVector(np.zeros((self.grid.size, self.dim)), np.zeros(self.dim))

    # -- solution operator -------------------------------------------------
    def solve_forward(self, f) -> np.ndarray:
        """Values ``u(t_j)`` of ``u' + A u = f``, ``u(0) = 0``, f piecewise constant."""
        f = f.values if isinstance(f, SpaceTimeField) else np.asarray(f, dtype=float)
        c = np.einsum("jkn,kn->jn", self.propagator, self._m(f))
        return self._n(c)

    def state_at(self, rate, t) -> np.ndarray:
        """State at arbitrary times ``t`` (1-d array), shape ``(len(t), d)``."""
        c = self._m(rate)
        g = self.gamma
        out = np.stack([np.sum(self.grid.cell_exp_integral(g, tj) * c, axis=0)
                        for tj in np.atleast_1d(t)])
        return self._n(out)

    def final_value(self, rate) -> np.ndarray:
        """``u(T) = int_0^T exp(-A (T - s)) r(s) ds``."""
        return self._n(np.sum(self.E * self._m(rate), axis=0))

    def time_integral(self, rate) -> np.ndarray:
        """``int_0^T u(t) dt`` for the state generated by ``rate``."""
        w = self.grid.weights[:, None]
        return self._n(np.sum((w - self.E) / self.gamma * self._m(rate), axis=0))

    def time_sum(self, f) -> np.ndarray:
        """``int_0^T f(t) dt`` for a piecewise constant ``f``."""
        return np.tensordot(self.grid.weights, np.asarray(f, dtype=float), axes=1)

    # -- block operator ----------------------------------------------------
    def apply(self, x: BhBlockVector):
        rate, theta = x
        y1 = np.asarray(rate, dtype=float) + self.lap.power(theta, 1.0)[None, :]
        y2 = self.final_value(rate) + theta
        return y1, y2

    def adjoint(self, y) -> BhBlockVector:
        """Adjoint with respect to ``U0 x H^1_0`` and ``L2(H^{-1}) x L2``.

        The state part is returned through its generator,
        ``y1 + A exp(-A (T - .)) y2`` averaged over each cell; the state it
        generates is ``int_0^t exp(-A (t - s)) y1(s) ds`` plus the image of
        ``y2`` under the adjoint of the final-time evaluation.
        """
        y1, y2 = y
        c1 = self._m(y1)
        c2 = self._m(y2)
        g = self.gamma
        w = self.grid.weights[:, None]
        rate = c1 + g * self.E / w * c2[None, :]
        theta = (np.sum(w * c1, axis=0) + c2) / g
        return BhBlockVector(self._n(rate), self._n(theta))

    def normal(self, x) -> BhBlockVector:
        return self.adjoint(self.apply(x))

    def final_time_adjoint(self, y2, t) -> np.ndarray:
        """Continuous adjoint of ``u -> u(T)``: ``(exp(-A(T-t)) - exp(-A(T+t))) y2 / 2``."""
        c = self._m(y2)
        g = self.gamma
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        fac = 0.5 * np.exp(-g * (self.grid.T - t)) * -np.expm1(-2.0 * g * t)
        return self._n(fac * c)

    # -- inner products ----------------------------------------------------
    def domain_inner(self, x, z) -> float:
        w = self.grid.weights[:, None]
        g = self.gamma
        a = np.sum(w * self._m(x[0]) * self._m(z[0]) / g)
        b = np.sum(g * self._m(x[1]) * self._m(z[1]))
        return float(a + b)

    def range_inner(self, y, z) -> float:
        w = self.grid.weights[:, None]
        a = np.sum(w * self._m(y[0]) * self._m(z[0]) / self.gamma)
        b = np.sum(self._m(y[1]) * self._m(z[1]))
        return float(a + b)

    def domain_norm(self, x) -> float:
        return float(np.sqrt(self.domain_inner(x, x)))

    def range_norm(self, y) -> float:
        return float(np.sqrt(self.range_inner(y, y)))

    # -- unitary transform and transformed normal operator -----------------
    def transform(self, x: BhBlockVector):
        """``(u, theta) -> (A^{-1/2}(d/dt + A) u, A^{1/2} theta)``, unitary onto L2(L2) x L2."""
        return self.lap.power(x.rate, -0.5), self.lap.power(x.theta, 0.5)

    def inverse_transform(self, z) -> BhBlockVector:
        f, g = z
        return BhBlockVector(self.lap.power(f, 0.5), self.lap.power(g, -0.5))

    def transformed_normal(self, z):
        """Galerkin form of the transformed normal operator on piecewise constants.

        Blocks (per mode, ``e(t) = exp(-gamma (T - t))`` averaged on cells):
        ``f + gamma e int e f``, ``(1 + e) g``, ``int (1 + e) f``,
        ``(T + 1/gamma) g``.
        """
        f, g_ = z
        cf = self._m(f)
        cg = self._m(g_)
        g = self.gamma
        w = self.grid.weights[:, None]
        ebar = self.E / w
        hist = np.sum(self.E * cf, axis=0)
        out_f = cf + g * ebar * hist + (1.0 + ebar) * cg
        out_g = np.sum((w + self.E) * cf, axis=0) + (self.grid.T + 1.0 / g) * cg
        return self._n(out_f), self._n(out_g)

    def history_to_final(self, f) -> np.ndarray:
        """``int_0^T exp(-A (T - s)) f(s) ds`` for piecewise constant ``f``."""
        return self._n(np.sum(self.E * self._m(f), axis=0))

    def l2l2_norm(self, f) -> float:
        w = self.grid.weights[:, None]
        return float(np.sqrt(np.sum(w * self._m(f) ** 2)))

    def h1_norm(self, v) -> float:
        return float(np.sqrt(np.sum(self.gamma * self._m(v) ** 2)))

    def d_block_norm(self, f) -> float:
        """Exact L2(L2) norm of ``A^{1/2} exp(-A(T - .)) A^{1/2} int_0^T exp(-A(T - s)) f(s) ds``."""
        g = self.gamma
        h = np.sum(self.E * self._m(f), axis=0)
        time_l2 = -np.expm1(-2.0 * g * self.grid.T) / (2.0 * g)
        return float(np.sqrt(np.sum((g * h) ** 2 * time_l2)))


# -- analytic eigenvalues ----------------------------------------------------

class ComplexRootsError(ArithmeticError):
    """The cubic has a complex conjugate root pair (attached as ``roots``)."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = roots


@dataclass(frozen=True)
class BhCubicCoefficients:
    """Coefficients of the per-mode cubic for the non-unit eigenvalues.

    ``lambda^3 - (T + 5/2 + alpha) lambda^2 + (3/2 (T + 1) + beta) lambda = rhs``

    Parameters
    ----------
    mu : float
        Eigenvalue of ``A^{-1}``.
    T : float
        Final time.
    half_rate_alpha : bool
        Use ``alpha = mu - exp(-T/mu)/2`` instead of the value
        ``mu - exp(-2T/mu)/2`` that follows from expanding the determinant
        of the per-mode system.
    """

    mu: float
    T: float = 1.0
    half_rate_alpha: bool = False

    def __post_init__(self):
        if not (self.mu > 0 and self.T > 0):
            raise ValueError("mu and T must be positive")

    @property
    def alpha(self) -> float:
        k = 1.0 if self.half_rate_alpha else 2.0
        return self.mu - 0.5 * np.exp(-k * self.T / self.mu)

    @property
    def beta(self) -> float:
        mu, T = self.mu, self.T
        return 2.0 * mu * np.exp(-T / mu) - 0.5 * np.exp(-2.0 * T / mu) * (T + 1.0)

    @property
    def rhs(self) -> float:
        return self.mu * np.exp(-2.0 * self.T / self.mu)

    def polynomial(self) -> np.ndarray:
        """Monic coefficients, highest degree first."""
        T = self.T
        return np.array([1.0, -(T + 2.5 + self.alpha), 1.5 * (T + 1.0) + self.beta, -self.rhs])


def analytic_cubic_roots(c: BhCubicCoefficients) -> np.ndarray:
    """Real roots of the cubic, ascending.

    The smallest root is recomputed as ``rhs / (lambda_2 lambda_3)`` since it
    underflows relative to the others (it decays like ``exp(-2T/mu)``).

    Raises
    ------
    ComplexRootsError
        If the cubic has a complex pair.
    """
    p = c.polynomial()
    r = np.roots(p)
    scale = np.abs(r).max()
    if np.any(np.abs(r.imag) > 1e-10 * scale):
        raise ComplexRootsError(f"cubic for mu={c.mu}, T={c.T} has complex roots {r}", r)
    r = np.sort(r.real)
    r[0] = c.rhs / (r[1] * r[2])
    return r


# -- discrete eigenproblem ---------------------------------------------------

def _quadrature_vectors(gamma: float, grid: TimeGrid, quadrature: str):
    w = grid.weights
    if quadrature == "exact":
        e = grid.cell_exp_integral(np.array([gamma]))[:, 0]
        return np.sqrt(w), e / np.sqrt(w)
    if quadrature == "nodal":
        return np.sqrt(w), np.sqrt(w) * np.exp(-gamma * (grid.T - grid.t))
    raise ValueError(f"unknown quadrature {quadrature!r}")


def mode_matrix(gamma: float, grid: TimeGrid, quadrature: str = "nodal",
                corner: str = "consistent") -> np.ndarray:
    """Whitened ``(N + 2) x (N + 2)`` system of one spatial mode.

    ``quadrature="nodal"`` replaces cell integrals of ``exp(-gamma (T - s))``
    by ``w_k exp(-gamma (T - t_k))``; ``"exact"`` integrates them.
    ``corner="variant"`` sets the ``(0, N)`` entry of the history block to
    ``tau gamma exp(-gamma)`` instead of the value ``tau/2 gamma exp(-gamma T)``
    produced by the quadrature rule (nodal quadrature only).
    """
    sw, e = _quadrature_vectors(gamma, grid, quadrature)
    n = grid.size
    s = np.empty((n + 1, n + 1))
    s[:n, :n] = np.eye(n) + gamma * np.outer(e, e)
    if corner == "variant":
        if quadrature != "nodal":
            raise ValueError("the variant corner entry only applies to nodal quadrature")
        s[0, n - 1] = s[n - 1, 0] = grid.tau * gamma * np.exp(-gamma)
    elif corner != "consistent":
        raise ValueError(f"unknown corner option {corner!r}")
    s[:n, n] = s[n, :n] = sw + e
    s[n, n] = grid.T + 1.0 / gamma
    return s


def _pencil_operator(mesh: Mesh):
    M = assemble_mass(mesh)
    K = assemble_stiffness(mesh)
    m_isqrt = matrix_function(M, lambda x: x ** -0.5)
    a_h = m_isqrt @ K @ m_isqrt
    return sym_eig(0.5 * (a_h + a_h.T))


def assemble_discrete_eigensystem(mesh: Mesh, N: int = 4, T: float = 1.0,
                                  quadrature: str = "nodal",
                                  corner: str = "consistent") -> np.ndarray:
    """Dense symmetric matrix of the time-discretised transformed problem.

    Unknowns are ``(f_0, ..., f_N, g)``, each a block of ``d`` interior
    values, in the coordinates whitened by the mass matrix, with
    ``A_h = M^{-1/2} K M^{-1/2}``.  Matrix exponentials are formed from a
    single eigendecomposition of ``A_h`` and cached per distinct argument.
    """
    grid = TimeGrid(T, N)
    gam, q = _pencil_operator(mesh)
    d = gam.size
    n = grid.size
    cache: dict[float, np.ndarray] = {}

    def fq(factors):
        out = (q * factors) @ q.T
        return 0.5 * (out + out.T)

    # per-mode quadrature vectors (the nodal rule factorises over modes)
    sw = np.sqrt(grid.weights)
    if quadrature == "nodal":
        ev = sw[:, None] * np.exp(-np.outer(grid.T - grid.t, gam))
    elif quadrature == "exact":
        ev = grid.cell_exp_integral(gam) / sw[:, None]
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")

    big = np.zeros(((n + 1) * d, (n + 1) * d))
    for l in range(n):
        for k in range(l, n):
            key = (l, k)
            blk = cache.get(key)
            if blk is None:
                blk = fq(gam * ev[l] * ev[k])
                cache[key] = blk
            if l == k:
                blk = blk + np.eye(d)
            big[l * d:(l + 1) * d, k * d:(k + 1) * d] = blk
            big[k * d:(k + 1) * d, l * d:(l + 1) * d] = blk.T
        cpl = fq(sw[l] + ev[l])
        big[n * d:, l * d:(l + 1) * d] = cpl
        big[l * d:(l + 1) * d, n * d:] = cpl.T
    if corner == "variant":
        if quadrature != "nodal":
            raise ValueError("the variant corner entry only applies to nodal quadrature")
        blk = fq(grid.tau * gam * np.exp(-gam))
        big[0:d, (n - 1) * d:n * d] = blk
        big[(n - 1) * d:n * d, 0:d] = blk
    elif corner != "consistent":
        raise ValueError(f"unknown corner option {corner!r}")
    big[n * d:, n * d:] = fq(grid.T + 1.0 / gam)
    return 0.5 * (big + big.T)


def discrete_spectrum_bh(mesh: Mesh, N: int = 4, T: float = 1.0, count: int = 700,
                         route: str = "modal", quadrature: str = "nodal",
                         corner: str = "consistent") -> np.ndarray:
    """Largest ``count`` eigenvalues of the discrete system, descending.

    ``route="dense"`` diagonalises :func:`assemble_discrete_eigensystem`;
    ``route="modal"`` diagonalises one small block per eigenvalue of the
    ``(K, M)`` pencil.  Both give the same spectrum.
    """
    grid = TimeGrid(T, N)
    if route == "dense":
        lam = sym_eig(assemble_discrete_eigensystem(mesh, N, T, quadrature, corner)).eigenvalues
    elif route == "modal":
        gam = gen_sym_eig(assemble_stiffness(mesh), assemble_mass(mesh)).eigenvalues
        lam = np.concatenate([sym_eig(mode_matrix(g, grid, quadrature, corner)).eigenvalues
                              for g in gam])
    else:
        raise ValueError(f"unknown route {route!r}")
    lam = np.sort(lam)[::-1]
    if count > lam.size:
        raise ValueError(f"count {count} exceeds the system dimension {lam.size}")
    return lam[:count]
