"""Dirichlet Laplacian on the unit square in its eigenbasis.

The operator ``A = -Laplace`` with homogeneous Dirichlet conditions on
``(0, 1)^2`` has eigenfunctions ``phi_jk(x, y) = 2 sin(j pi x) sin(k pi y)``
and eigenvalues ``pi^2 (j^2 + k^2)``.  Functions of ``A`` (powers, heat
semigroup) are diagonal in this basis.

:class:`DiagonalizedLaplacian` is the common interface shared with the
finite-element backend in :mod:`aaobayes.fem`: every backend exposes its
eigenvalues and a pair of maps between native coordinates and an
L2-orthonormal modal basis.  All block operators of the package are written
against that interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiagonalizedLaplacian",
    "SpectralBasis",
    "SpectralField",
    "apply_power",
    "apply_semigroup",
    "synthesize",
    "analyze",
]


class DiagonalizedLaplacian:
    """Self-adjoint positive operator with a known L2-orthonormal eigenbasis.

    Subclasses set ``eigenvalues`` (ascending) and implement
    :meth:`to_modal` / :meth:`from_modal`, which act on the last axis.
    """

    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def to_modal(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def from_modal(self, c: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def multiplier(self, v: np.ndarray, factors: np.ndarray) -> np.ndarray:
        """Apply the diagonal operator with modal ``factors`` to ``v``."""
        return self.from_modal(factors * self.to_modal(v))

    def power(self, v: np.ndarray, s: float) -> np.ndarray:
        return self.multiplier(v, self.eigenvalues ** float(s))

    def semigroup(self, v: np.ndarray, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("backward semigroup (t < 0) is not supported")
        return self.multiplier(v, np.exp(-t * self.eigenvalues))

    def inner(self, v, w) -> float:
        """L2 inner product."""
        return float(np.sum(self.to_modal(v) * self.to_modal(w)))


class SpectralBasis(DiagonalizedLaplacian):
    """Truncated sine basis with ``J`` modes per direction.

    Modes are ordered by ascending eigenvalue; ties are broken
    lexicographically in ``(j, k)``.  Native coordinates are the expansion
    coefficients, so the modal maps are the identity.
    """

    def __init__(self, modes_per_dim: int = 16):
        if modes_per_dim < 1:
            raise ValueError("modes_per_dim must be positive")
        self.modes_per_dim = int(modes_per_dim)
        jj, kk = np.meshgrid(np.arange(1, modes_per_dim + 1), np.arange(1, modes_per_dim + 1),
                             indexing="ij")
        jj, kk = jj.ravel(), kk.ravel()
        order = np.lexsort((kk, jj, jj ** 2 + kk ** 2))
        self.j = jj[order]
        self.k = kk[order]
        self.eigenvalues = np.pi ** 2 * (self.j ** 2 + self.k ** 2).astype(float)

    def __repr__(self):
        return f"SpectralBasis(modes_per_dim={self.modes_per_dim})"

    def to_modal(self, v):
        return np.array(v, dtype=float)

    def from_modal(self, c):
        return np.array(c, dtype=float)

    def mode_index(self, j: int, k: int) -> int:
        hit = np.flatnonzero((self.j == j) & (self.k == k))
        if hit.size == 0:
            raise KeyError(f"mode ({j}, {k}) not in basis")
        return int(hit[0])

    def evaluate(self, coeffs, x, y) -> np.ndarray:
        """Evaluate the expansion at points ``(x, y)`` (arrays of equal shape)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sx = np.sin(np.pi * np.multiply.outer(x.ravel(), self.j))
        sy = np.sin(np.pi * np.multiply.outer(y.ravel(), self.k))
        return (2.0 * (sx * sy) @ np.asarray(coeffs, dtype=float)).reshape(x.shape)

    def _sine_tables(self, n: int):
        x = np.arange(1, n + 1) / (n + 1)
        J = self.modes_per_dim
        s = np.sin(np.pi * np.outer(np.arange(1, J + 1), x))  # (J, n)
        return s[self.j - 1], s[self.k - 1]

    def synthesize(self, coeffs, n: int) -> np.ndarray:
        """Values at the ``n x n`` interior grid ``x_i = i / (n + 1)``.

        Returns an array indexed ``[iy, ix]``.
        """
        if n < 1:
            raise ValueError("grid size must be positive")
        sj, sk = self._sine_tables(n)
        c = np.asarray(coeffs, dtype=float)
        return 2.0 * np.einsum("m,my,mx->yx", c, sk, sj)

    def analyze(self, values) -> np.ndarray:
        """Coefficients of grid values produced by :meth:`synthesize`.

        Exact (discrete sine orthogonality) whenever ``n >= J``.
        """
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        if values.shape != (n, n):
            raise ValueError("expected a square grid of values")
        if n < self.modes_per_dim:
            raise ValueError(
                f"grid with {n} interior nodes per direction aliases {self.modes_per_dim} modes")
        sj, sk = self._sine_tables(n)
        return 2.0 * np.einsum("yx,my,mx->m", values, sk, sj) / (n + 1) ** 2


@dataclass(frozen=True)
class SpectralField:
    """Coefficient vector together with its basis."""

    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    def h1_norm(self) -> float:
        return float(np.sqrt(np.sum(self.basis.eigenvalues * self.coeffs ** 2)))

    def hminus1_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2 / self.basis.eigenvalues)))


def apply_power(f: SpectralField, s: float) -> SpectralField:
    """``A^s f``."""
    return SpectralField(f.basis, f.basis.power(f.coeffs, s))


def apply_semigroup(f: SpectralField, t: float) -> SpectralField:
    """``exp(-t A) f`` for ``t >= 0``."""
    return SpectralField(f.basis, f.basis.semigroup(f.coeffs, t))


def synthesize(f: SpectralField, n: int) -> np.ndarray:
    return f.basis.synthesize(f.coeffs, n)


def analyze(values, basis: SpectralBasis) -> SpectralField:
    return SpectralField(basis, basis.analyze(values))
