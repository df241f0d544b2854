"""Small dense symmetric-matrix kernels.

Half-vectorization (vech) and its inverse, spectral norms, symmetric
matrix exponentials and SPD quadratic forms. Everything operates on
plain float ndarrays; ``SpdMatrix`` wraps a matrix together with its
cached Cholesky factor.

The vech ordering is normative for every serialized vector in this
package: lower triangle including the diagonal, column by column, i.e.
``(m[0,0], m[1,0], ..., m[d-1,0], m[1,1], ..., m[d-1,d-1])``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf

from .errors import NotPositiveDefiniteError

__all__ = [
    "vech_dim",
    "matrix_dim",
    "vech_indices",
    "vech",
    "unvech",
    "spectral_norm",
    "sym_exp",
    "sym_exp_sqrt",
    "sym_exp_series",
    "SpdMatrix",
    "spd_quadratic_form",
]


def vech_dim(d: int) -> int:
    """Length d(d+1)/2 of the half-vectorization of a d x d matrix."""
    return d * (d + 1) // 2


def matrix_dim(vdim: int) -> int:
    """Matrix dimension d with d(d+1)/2 == vdim; raises if none exists."""
    d = int((np.sqrt(8 * vdim + 1) - 1) / 2 + 0.5)
    if d * (d + 1) // 2 != vdim:
        raise ValueError(f"{vdim} is not a triangular number d(d+1)/2")
    return d


@lru_cache(maxsize=64)
def vech_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) index arrays of the lower triangle in column-major order."""
    cols, rows = np.triu_indices(d)
    return rows, cols


def vech(m: np.ndarray) -> np.ndarray:
    """Stack the lower triangle (with diagonal) of a symmetric matrix.

    The input must be square and symmetric; symmetry is taken on trust
    for speed, entries are read from the lower triangle.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    rows, cols = vech_indices(m.shape[0])
    return m[rows, cols].copy()


def unvech(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Rebuild the symmetric matrix whose half-vectorization is ``v``.

    ``dim`` may be passed to assert the intended matrix dimension; a
    mismatch with ``len(v)`` is an error.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a 1-d vector")
    d = matrix_dim(v.size)
    if dim is not None and dim != d:
        raise ValueError(f"vector of length {v.size} does not match dim {dim}")
    rows, cols = vech_indices(d)
    m = np.zeros((d, d))
    m[rows, cols] = v
    m[cols, rows] = v
    return m


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value of a real matrix.

    Full SVD for dimensions up to 64; power iteration on ``M^T M``
    (relative tolerance 1e-12, at most 10_000 iterations) beyond that.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    if min(m.shape) == 0:
        return 0.0
    if max(m.shape) <= 64:
        return float(np.linalg.norm(m, 2))
    g = m.T @ m
    x = np.ones(g.shape[0]) / np.sqrt(g.shape[0])
    prev = 0.0
    for _ in range(10_000):
        y = g @ x
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
        if abs(lam - prev) <= 1e-12 * lam:
            break
        prev = lam
    return float(np.sqrt(lam))


def _sym_exp_matrix(m: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(scale * m) for symmetric m via eigendecomposition."""
    w, q = np.linalg.eigh(m)
    e = (q * np.exp(scale * w)) @ q.T
    return 0.5 * (e + e.T)


def sym_exp(m: np.ndarray) -> "SpdMatrix":
    """Matrix exponential of a symmetric matrix; always positive definite."""
    m = np.asarray(m, dtype=float)
    return SpdMatrix(_sym_exp_matrix(m))


def sym_exp_sqrt(m: np.ndarray) -> "SpdMatrix":
    """Principal square root of ``sym_exp(m)``, computed as exp(m/2)."""
    m = np.asarray(m, dtype=float)
    return SpdMatrix(_sym_exp_matrix(m, scale=0.5))


def sym_exp_series(m: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    """Power-series evaluation of exp(m), truncated when the next term's
    spectral norm falls below ``tol``.

    Slow; kept as an independent cross-check of the eigendecomposition
    route.
    """
    m = np.asarray(m, dtype=float)
    d = m.shape[0]
    total = np.eye(d)
    term = np.eye(d)
    for k in range(1, 1000):
        term = term @ m / k
        total = total + term
        if spectral_norm(term) < tol:
            break
    return total


class SpdMatrix:
    """A symmetric positive-definite matrix with a cached Cholesky factor.

    Construction fails with :class:`NotPositiveDefiniteError` when the
    factorization does, carrying the order of the offending leading
    minor. No eigenvalue thresholding is applied.
    """

    __slots__ = ("matrix", "chol")

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-8 * max(1.0, np.abs(matrix).max())):
            raise ValueError("matrix is not symmetric")
        c, info = dpotrf(matrix, lower=1, overwrite_a=0)
        if info != 0:
            raise NotPositiveDefiniteError(
                f"leading minor of order {info} is not positive definite", minor=int(info)
            )
        self.matrix = 0.5 * (matrix + matrix.T)
        self.chol = np.tril(c)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def quadratic_form(self, v: np.ndarray) -> float:
        """v^T M^{-1} v through the Cholesky factor; >= 0, == 0 iff v == 0."""
        v = np.asarray(v, dtype=float)
        z = solve_triangular(self.chol, v, lower=True, check_finite=False)
        return float(z @ z)

    def quadratic_forms(self, rows: np.ndarray) -> np.ndarray:
        """Quadratic form of every row of a (k, dim) array, as a length-k vector."""
        z = solve_triangular(self.chol, np.asarray(rows, dtype=float).T, lower=True, check_finite=False)
        return np.einsum("ij,ij->j", z, z)


def spd_quadratic_form(m: SpdMatrix | np.ndarray, v: np.ndarray) -> float:
    """v^T m^{-1} v for SPD ``m`` via a stable factorization."""
    if not isinstance(m, SpdMatrix):
        m = SpdMatrix(m)
    if m.dim != np.asarray(v).shape[-1]:
        raise ValueError("dimension mismatch between matrix and vector")
    return m.quadratic_form(v)
