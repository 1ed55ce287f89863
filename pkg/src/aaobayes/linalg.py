"""Dense symmetric eigensolvers, conjugate gradients and matrix functions.

Two eigensolver routes are provided.  ``method="ql"`` is a self-contained
Householder tridiagonalisation followed by implicit QL iterations with
Wilkinson shifts.  ``method="lapack"`` (the default) calls LAPACK through
:func:`numpy.linalg.eigh` and is used for the larger assembled systems; the
two routes are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import lapack, solve_triangular

__all__ = [
    "DecompositionError",
    "ConvergenceError",
    "EigenDecomposition",
    "InnerProduct",
    "CGResult",
    "as_symmetric",
    "tridiagonalize",
    "tridiagonal_ql",
    "sym_eig",
    "cholesky",
    "gen_sym_eig",
    "matrix_function",
    "conjugate_gradient",
]

QL_MAX_ITER = 60


class DecompositionError(np.linalg.LinAlgError):
    """A factorisation or eigenvalue iteration broke down."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance.

    The best iterate and its residual are attached for inspection.
    """

    def __init__(self, message, x=None, iterations=0, residual=np.inf):
        super().__init__(message)
        self.x = x
        self.iterations = iterations
        self.residual = residual


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_symmetric(a, rtol: float = 1e-10, name: str = "matrix") -> np.ndarray:
    """Return a float copy of ``a`` with exactly symmetric storage.

    Raises ``ValueError`` if ``a`` is not square or if its skew part exceeds
    ``rtol`` relative to its largest entry.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    skew = np.abs(a - a.T).max()
    if skew > rtol * scale:
        raise ValueError(f"{name} is not symmetric (max |A - A^T| = {skew:.3e})")
    return 0.5 * (a + a.T)


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive (deterministic output)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def tridiagonalize(a: np.ndarray):
    """Householder reduction ``A = Q T Q^T`` of a symmetric matrix.

    Returns
    -------
    d : ndarray, shape (n,)
        Diagonal of ``T``.
    e : ndarray, shape (n-1,)
        Sub-diagonal of ``T``.
    q : ndarray, shape (n, n)
        Orthogonal factor.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        alpha = -np.copysign(norm_x, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    d = np.diag(a).copy()
    e = np.diag(a, -1).copy()
    return d, e, q


def tridiagonal_ql(d, e, z=None, max_iter: int = QL_MAX_ITER):
    """Implicit QL iteration with Wilkinson shifts on a symmetric tridiagonal.

    Parameters
    ----------
    d, e : array_like
        Diagonal (n) and sub-diagonal (n-1).
    z : ndarray, optional
        Matrix whose columns are rotated along with the iteration; pass the
        identity to obtain eigenvectors of ``T`` or ``Q`` from
        :func:`tridiagonalize` to obtain those of ``A``.
    max_iter : int
        Iteration cap per eigenvalue.

    Returns
    -------
    d : ndarray
        Unsorted eigenvalues.
    z : ndarray or None
        Rotated ``z``.
    """
    d = np.array(d, dtype=float)
    n = d.size
    e = np.append(np.array(e, dtype=float), 0.0)
    if z is not None:
        z = np.array(z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise DecompositionError(
                    f"QL iteration for eigenvalue {l} did not converge after {max_iter} iterations")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def sym_eig(a, method: str = "lapack", max_iter: int = QL_MAX_ITER) -> EigenDecomposition:
    """Eigendecomposition of a dense symmetric matrix.

    Eigenvalues are returned ascending (stable sort, so ties keep their
    original order) and each eigenvector is normalised so that its
    largest-magnitude entry is positive.
    """
    a = as_symmetric(a)
    if method == "lapack":
        w, v = np.linalg.eigh(a)
    elif method == "ql":
        d, e, q = tridiagonalize(a)
        w, v = tridiagonal_ql(d, e, q, max_iter=max_iter)
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], _canonical_signs(v[:, order]))


def cholesky(m) -> np.ndarray:
    """Lower Cholesky factor; a failure names the offending pivot."""
    m = as_symmetric(m, name="mass matrix")
    c, info = lapack.dpotrf(m, lower=1, clean=1)
    if info > 0:
        raise DecompositionError(
            f"matrix is not positive definite: Cholesky pivot {info - 1} is not positive")
    if info < 0:
        raise DecompositionError(f"dpotrf argument {-info} invalid")
    return c


def gen_sym_eig(a, m, method: str = "lapack") -> EigenDecomposition:
    """Solve ``A x = lambda M x`` with ``M`` symmetric positive definite.

    The pencil is reduced to ``L^{-1} A L^{-T}`` with ``M = L L^T``.  The
    returned eigenvectors are M-orthonormal.
    """
    a = as_symmetric(a)
    low = cholesky(m)
    if a.shape != low.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {low.shape}")
    tmp = solve_triangular(low, a, lower=True)
    reduced = solve_triangular(low, tmp.T, lower=True)
    w, y = sym_eig(0.5 * (reduced + reduced.T), method=method)
    x = solve_triangular(low.T, y, lower=False)
    return EigenDecomposition(w, x)


def matrix_function(a, f: Callable[[np.ndarray], np.ndarray], method: str = "lapack") -> np.ndarray:
    """``Q f(Lambda) Q^T`` for symmetric ``A = Q Lambda Q^T``."""
    w, q = sym_eig(a, method=method)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    bad = ~np.isfinite(fw)
    if bad.any():
        raise ValueError(f"function is not finite at eigenvalue {w[np.argmax(bad)]!r}")
    out = (q * fw) @ q.T
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class InnerProduct:
    """Inner product ``<v, w> = v^T G w``.

    ``gram`` may be ``None`` (Euclidean), a 1-d array of diagonal weights, a
    dense matrix, or a callable returning ``G w``.
    """

    gram: object = None

    def apply(self, w: np.ndarray) -> np.ndarray:
        g = self.gram
        if g is None:
            return w
        if callable(g):
            return g(w)
        g = np.asarray(g)
        if g.ndim == 1:
            return g * w
        return g @ w

    def dot(self, v, w) -> float:
        return float(np.vdot(v, self.apply(w)))

    def norm(self, v) -> float:
        return float(np.sqrt(max(self.dot(v, v), 0.0)))


class CGResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def conjugate_gradient(op, rhs, ip: InnerProduct | None = None, tol: float = 1e-8,
                       max_iter: int = 500, x0=None, raise_on_failure: bool = True) -> CGResult:
    """Conjugate gradients for an operator self-adjoint in ``ip``.

    Parameters
    ----------
    op : callable
        Action ``x -> A x``; must be self-adjoint and positive definite in
        the inner product ``ip``.
    rhs : ndarray
        Right-hand side.
    ip : InnerProduct, optional
        Inner product in which residuals are measured (Euclidean default).
    tol : float
        Relative tolerance: stop once ``|r| <= tol |rhs|`` in ``ip``.
    max_iter : int
        Iteration cap.
    x0 : ndarray, optional
        Initial guess (zero by default).

    Returns
    -------
    CGResult
        Solution, iterations used, final relative residual and a flag.
    """
    ip = ip or InnerProduct()
    b = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ConvergenceError("right-hand side is not finite")
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    bnorm = ip.norm(b)
    if bnorm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0, True)
    r = b - op(x) if x0 is not None else b.copy()
    p = r.copy()
    rr = ip.dot(r, r)
    res = np.sqrt(rr) / bnorm
    it = 0
    while res > tol:
        if it >= max_iter:
            if raise_on_failure:
                raise ConvergenceError(
                    f"CG did not converge in {max_iter} iterations (relative residual {res:.3e})",
                    x=x, iterations=it, residual=res)
            return CGResult(x, it, res, False)
        ap = op(p)
        pap = ip.dot(p, ap)
        if not np.isfinite(pap):
            raise ConvergenceError(f"non-finite value at CG iteration {it}", x=x, iterations=it,
                                   residual=res)
        if pap <= 0.0:
            raise ConvergenceError(
                f"operator not positive definite: <p, Ap> = {pap:.3e} at CG iteration {it}",
                x=x, iterations=it, residual=res)
        step = rr / pap
        x = x + step * p
        r = r - step * ap
        rr_new = ip.dot(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        res = np.sqrt(max(rr, 0.0)) / bnorm
    return CGResult(x, it, res, True)
