"""P1 finite elements on a structured triangulation of the unit square.

Nodes are numbered ``iy * n + ix`` with ``n`` nodes per direction including
the boundary.  Each square cell is split along its ``(0, 0)-(1, 1)``
diagonal.  Homogeneous Dirichlet data are imposed by eliminating the boundary
rows and columns, so fields and matrices live on interior nodes only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .laplacian import DiagonalizedLaplacian
from .linalg import gen_sym_eig

__all__ = [
    "AssemblyError",
    "Mesh",
    "NodalField",
    "ObservationSet",
    "FELaplacian",
    "assemble_mass",
    "assemble_stiffness",
    "observation_operator",
    "random_observation_points",
    "add_noise",
    "interpolate",
    "restrict_to_coarse",
]


class AssemblyError(ValueError):
    pass


class Mesh:
    """Triangulation of ``[0, 1]^2``.

    Parameters
    ----------
    nodes_per_dim : int
        Nodes per direction including both boundary nodes (``n >= 3``).
    coords, triangles : ndarray, optional
        Override the structured geometry (used to exercise assembly checks).
    """

    def __init__(self, nodes_per_dim: int, coords=None, triangles=None):
        n = int(nodes_per_dim)
        if n < 3:
            raise ValueError("a mesh needs at least 3 nodes per direction")
        self.n = n
        self.h = 1.0 / (n - 1)
        t = np.linspace(0.0, 1.0, n)
        if coords is None:
            xx, yy = np.meshgrid(t, t)  # [iy, ix]
            coords = np.column_stack([xx.ravel(), yy.ravel()])
        self.coords = np.asarray(coords, dtype=float)
        if triangles is None:
            iy, ix = np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing="ij")
            a = (iy * n + ix).ravel()
            b, c, d = a + 1, a + n + 1, a + n
            triangles = np.empty((2 * a.size, 3), dtype=int)
            triangles[0::2] = np.column_stack([a, b, c])
            triangles[1::2] = np.column_stack([a, c, d])
        self.triangles = np.asarray(triangles, dtype=int)
        on_bdry = np.isin(self.coords[:, 0], (0.0, 1.0)) | np.isin(self.coords[:, 1], (0.0, 1.0))
        self.interior = np.flatnonzero(~on_bdry)
        self.boundary = np.flatnonzero(on_bdry)

    def __repr__(self):
        return f"Mesh(nodes_per_dim={self.n})"

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior.size

    @property
    def interior_coords(self) -> np.ndarray:
        return self.coords[self.interior]

    def signed_areas(self) -> np.ndarray:
        p = self.coords[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def to_full(self, interior_values) -> np.ndarray:
        """Pad interior values with the zero boundary data (last axis)."""
        v = np.asarray(interior_values, dtype=float)
        out = np.zeros(v.shape[:-1] + (self.n_nodes,))
        out[..., self.interior] = v
        return out

    def grid_tag(self) -> str:
        return f"p1-structured-{self.n}x{self.n}"


@dataclass(frozen=True)
class NodalField:
    """Interior nodal values of a P1 function with zero boundary data."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_interior,):
            raise ValueError(f"expected {self.mesh.n_interior} interior values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("nodal values must be finite")
        object.__setattr__(self, "values", v)

    def grid(self) -> np.ndarray:
        """Values on the full ``n x n`` node grid, indexed ``[iy, ix]``."""
        n = self.mesh.n
        return self.mesh.to_full(self.values).reshape(n, n)


def _element_data(mesh: Mesh):
    area = mesh.signed_areas()
    scale = mesh.h ** 2 if np.isfinite(mesh.h) else 1.0
    bad = np.flatnonzero(area <= 1e-12 * scale)
    if bad.size:
        k = int(bad[0])
        raise AssemblyError(f"triangle {k} is degenerate or inverted (signed area {area[k]:.3e})")
    p = mesh.coords[mesh.triangles]
    x, y = p[..., 0], p[..., 1]
    # gradients of the barycentric coordinates, shape (ntri, 3, 2)
    grads = np.stack([
        np.stack([y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]], axis=-1),
        np.stack([y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]], axis=-1),
        np.stack([y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]], axis=-1),
    ], axis=1) / (2.0 * area)[:, None, None]
    return area, grads


def _scatter(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    nn = mesh.n_nodes
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    full = np.zeros(nn * nn)
    np.add.at(full, rows * nn + cols, local.ravel())
    full = full.reshape(nn, nn)
    return 0.5 * (full + full.T)


def assemble_mass(mesh: Mesh, full: bool = False) -> np.ndarray:
    """Consistent P1 mass matrix (interior block unless ``full``)."""
    area, _ = _element_data(mesh)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m = _scatter(mesh, area[:, None, None] * ref)
    return m if full else m[np.ix_(mesh.interior, mesh.interior)]


def assemble_stiffness(mesh: Mesh, full: bool = False) -> np.ndarray:
    """P1 stiffness matrix of ``-Laplace`` (interior block unless ``full``)."""
    area, grads = _element_data(mesh)
    local = area[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)
    k = _scatter(mesh, local)
    return k if full else k[np.ix_(mesh.interior, mesh.interior)]


class FELaplacian(DiagonalizedLaplacian):
    """Discrete Dirichlet Laplacian given by the pencil ``(K, M)``.

    The modal basis consists of the M-orthonormal generalized eigenvectors
    ``V``; ``to_modal(v) = V^T M v`` and ``from_modal(c) = V c``.  In these
    coordinates the discrete operator ``M^{-1} K`` is diagonal, which makes
    powers and exponentials exact functions of the pencil.
    """

    def __init__(self, mesh: Mesh, method: str = "lapack"):
        self.mesh = mesh
        self.M = assemble_mass(mesh)
        self.K = assemble_stiffness(mesh)
        w, v = gen_sym_eig(self.K, self.M, method=method)
        if w[0] <= 0:
            raise AssemblyError("stiffness matrix is not positive definite on interior nodes")
        self.eigenvalues = w
        self.V = v
        self._MV = self.M @ v

    def __repr__(self):
        return f"FELaplacian({self.mesh!r})"

    def to_modal(self, v):
        return np.asarray(v, dtype=float) @ self._MV

    def from_modal(self, c):
        return np.asarray(c, dtype=float) @ self.V.T

    def apply_operator(self, v):
        """``M^{-1} K v``."""
        return self.power(v, 1.0)


@dataclass(frozen=True)
class ObservationSet:
    """Points inside the square with their P1 interpolation weights.

    ``nodes[i]`` lists the three vertex indices of the triangle containing
    point ``i`` and ``weights[i]`` its barycentric coordinates.
    """

    mesh: Mesh
    points: np.ndarray
    triangle_ids: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    seed: int | None = None

    def __len__(self):
        return self.points.shape[0]

    def matrix(self, interior_only: bool = True) -> np.ndarray:
        """Dense observation matrix acting on nodal values."""
        p = np.zeros((len(self), self.mesh.n_nodes))
        rows = np.repeat(np.arange(len(self)), 3)
        np.add.at(p, (rows, self.nodes.ravel()), self.weights.ravel())
        return p[:, self.mesh.interior] if interior_only else p

    def apply(self, values) -> np.ndarray:
        return self.matrix() @ np.asarray(values, dtype=float)


def _locate(mesh: Mesh, points: np.ndarray):
    n, h = mesh.n, mesh.h
    x, y = points[:, 0], points[:, 1]
    ix = np.minimum((x / h).astype(int), n - 2)
    iy = np.minimum((y / h).astype(int), n - 2)
    xi = x / h - ix
    eta = y / h - iy
    a = iy * n + ix
    lower = xi >= eta
    nodes = np.where(lower[:, None],
                     np.column_stack([a, a + 1, a + n + 1]),
                     np.column_stack([a, a + n + 1, a + n]))
    weights = np.where(lower[:, None],
                       np.column_stack([1 - xi, xi - eta, eta]),
                       np.column_stack([1 - eta, xi, eta - xi]))
    weights = np.clip(weights, 0.0, 1.0)
    weights /= weights.sum(axis=1, keepdims=True)
    cell = iy * (n - 1) + ix
    tri = 2 * cell + np.where(lower, 0, 1)
    return tri, nodes, weights


def observation_operator(mesh: Mesh, points, seed: int | None = None) -> ObservationSet:
    """P1 point evaluation at ``points`` (shape ``(m, 2)``, strictly interior)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError("points must have shape (m, 2)")
    inside = np.all((pts > 0.0) & (pts < 1.0), axis=1)
    if not inside.all():
        k = int(np.flatnonzero(~inside)[0])
        raise ValueError(f"observation point {k} at {tuple(pts[k])} is not strictly inside the domain")
    tri, nodes, weights = _locate(mesh, pts)
    return ObservationSet(mesh, pts, tri, nodes, weights, seed)


def random_observation_points(mesh: Mesh, count: int = 100, seed: int = 0,
                              margin: float | None = None) -> ObservationSet:
    """``count`` points drawn uniformly from ``[h, 1 - h]^2``."""
    h = mesh.h if margin is None else margin
    rng = np.random.default_rng(seed)
    pts = rng.uniform(h, 1.0 - h, size=(count, 2))
    return observation_operator(mesh, pts, seed=seed)


def add_noise(values, delta: float, seed: int | None = None, rng=None) -> np.ndarray:
    """``values + delta * eta`` with ``eta`` i.i.d. standard normal."""
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    values = np.asarray(values, dtype=float)
    if delta == 0:
        return values.copy()
    rng = np.random.default_rng(seed) if rng is None else rng
    return values + delta * rng.standard_normal(values.shape)


def interpolate(mesh: Mesh, func) -> NodalField:
    """Nodal interpolant of ``func(x, y)`` on the interior nodes."""
    xy = mesh.interior_coords
    return NodalField(mesh, np.asarray(func(xy[:, 0], xy[:, 1]), dtype=float))


def restrict_to_coarse(fine: NodalField, coarse: Mesh) -> NodalField:
    """P1 interpolation of a fine-mesh field at the interior nodes of ``coarse``."""
    if coarse.n == fine.mesh.n:
        return NodalField(coarse, fine.values.copy())
    obs = observation_operator(fine.mesh, coarse.interior_coords)
    return NodalField(coarse, obs.apply(fine.values))
