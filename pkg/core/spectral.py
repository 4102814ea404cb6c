"""Symmetric eigendecomposition, adjacency spectral embedding and alignment helpers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import EigenSolverError, NonPositiveSpectrum, PreconditionError, ZeroRow
from .graph_models import AdjacencySample

logger = logging.getLogger(__name__)

DENSE_MAX_N = 4096
EIGEN_RESIDUAL_TOL = 1e-8
TIE_TOLERANCE = 1e-10
LANCZOS_MAX_RESTARTS = 1000
ZERO_ROW_TOLERANCE = 1e-12

SolverMethod = Literal["auto", "dense", "lanczos"]
MatrixLike = Union[np.ndarray, sparse.spmatrix, sparse.sparray, AdjacencySample]


@dataclass(frozen=True, slots=True, eq=False)
class SpectralEmbedding:
    """Xhat = Vhat diag(eigenvalues)^{1/2} from the d algebraically largest eigenpairs."""

    Xhat: np.ndarray
    eigenvalues: np.ndarray
    Vhat: np.ndarray

    @property
    def n(self) -> int:
        return int(self.Xhat.shape[0])

    @property
    def d(self) -> int:
        return int(self.Xhat.shape[1])


@dataclass(frozen=True, slots=True, eq=False)
class AlignmentResult:
    """Orthogonal W minimising ||Xhat - X W||_F and the residuals after applying it."""

    W: np.ndarray
    residual_2inf: float
    residual_F: float


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of every column positive."""

    significant = np.abs(vectors) > ZERO_ROW_TOLERANCE
    first = np.argmax(significant, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _canonical_order(values: np.ndarray, vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-values, kind="stable")
    values, vectors = values[order], _fix_signs(vectors[:, order])
    scale = max(float(np.abs(values).max()), np.finfo(float).tiny)
    start = 0
    while start < values.size:
        stop = start + 1
        while stop < values.size and values[start] - values[stop] <= TIE_TOLERANCE * scale:
            stop += 1
        if stop - start > 1:
            # ties: order by eigenvector, lexicographically largest first
            group = sorted(range(start, stop), key=lambda col: tuple(-vectors[:, col]))
            vectors[:, start:stop] = vectors[:, group]
        start = stop
    return values, vectors


def _residuals(M, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    image = M @ vectors
    return np.linalg.norm(image - vectors * values, axis=0)


def eig_sym(
    M,
    d: int,
    *,
    method: SolverMethod = "auto",
    dense_max_n: int = DENSE_MAX_N,
    seed: Optional[int] = 0,
    tol: float = EIGEN_RESIDUAL_TOL,
    max_restarts: int = LANCZOS_MAX_RESTARTS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the d algebraically largest eigenvalues (descending) of symmetric M and their eigenvectors.

    Dense LAPACK (tridiagonal reduction) handles n <= ``dense_max_n``; larger
    matrices use implicitly restarted Lanczos for the top d+2 pairs, started
    from a vector drawn from ``seed``. Every residual ||Mv - lambda v|| must stay
    within ``tol`` times the largest retained |eigenvalue|, which never exceeds
    ||M||_2.
    """

    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise PreconditionError(f"M must be square (got shape {M.shape})")
    n = int(M.shape[0])
    if not 1 <= d <= n:
        raise PreconditionError(f"d must lie in [1, n={n}] (got d={d})")
    if method == "auto":
        method = "dense" if n <= dense_max_n else "lanczos"
    if method == "lanczos" and d + 2 >= n:
        method = "dense"

    if method == "dense":
        dense = M.toarray() if sparse.issparse(M) else np.asarray(M, dtype=float)
        if not np.allclose(dense, dense.T, rtol=0.0, atol=1e-12):
            raise PreconditionError("M must be symmetric")
        values, vectors = linalg.eigh(dense, subset_by_index=[n - d, n - 1])
        operator = dense
    else:
        k = min(d + 2, n - 1)
        v0 = None
        if seed is not None:
            v0 = np.random.default_rng(np.random.SeedSequence(seed)).standard_normal(n)
        try:
            values, vectors = eigsh(M, k=k, which="LA", v0=v0, maxiter=max_restarts * n, tol=0.0)
        except ArpackNoConvergence as exc:
            achieved = np.inf
            if exc.eigenvalues.size:
                achieved = float(_residuals(M, exc.eigenvalues, exc.eigenvectors).max())
            raise EigenSolverError(f"Lanczos did not converge for the top {k} eigenpairs", achieved) from exc
        keep = np.argsort(values)[::-1][:d]
        values, vectors = values[keep], vectors[:, keep]
        operator = M

    values, vectors = _canonical_order(np.asarray(values, dtype=float), np.asarray(vectors, dtype=float))
    scale = max(float(np.abs(values).max()), 1.0 if not np.any(values) else 0.0)
    residual = float(_residuals(operator, values, vectors).max())
    if residual > tol * scale:
        raise EigenSolverError(
            f"eigen-residual exceeds {tol:g} x the largest retained |eigenvalue| using the {method} solver",
            residual / scale,
        )
    logger.debug("eig_sym n=%d d=%d method=%s max residual %.3e", n, d, method, residual)
    return values, vectors


def as_matrix(A: MatrixLike, dense_max_n: int = DENSE_MAX_N):
    if isinstance(A, AdjacencySample):
        return A.to_dense() if A.n <= dense_max_n else A.to_sparse()
    if sparse.issparse(A):
        return A.tocsr().astype(float)
    return np.asarray(A, dtype=float)


def ase(
    A: MatrixLike,
    d: int,
    *,
    method: SolverMethod = "auto",
    dense_max_n: int = DENSE_MAX_N,
    seed: Optional[int] = 0,
) -> SpectralEmbedding:
    """Adjacency spectral embedding; fails with NonPositiveSpectrum if a retained eigenvalue is <= 0."""

    M = as_matrix(A, dense_max_n)
    n = int(M.shape[0])
    if d > n:
        raise PreconditionError(f"d must not exceed n={n} (got d={d})")
    values, vectors = eig_sym(M, d, method=method, dense_max_n=dense_max_n, seed=seed)
    for index, value in enumerate(values):
        if value <= 0.0:
            raise NonPositiveSpectrum(index, float(value))
    Xhat = vectors * np.sqrt(values)
    return SpectralEmbedding(Xhat=Xhat, eigenvalues=values, Vhat=vectors)


def align(Xhat: np.ndarray, X: np.ndarray) -> AlignmentResult:
    """Orthogonal Procrustes alignment of the ground truth X onto the embedding Xhat."""

    Xhat = np.asarray(Xhat, dtype=float)
    X = np.asarray(X, dtype=float)
    if Xhat.shape != X.shape:
        raise PreconditionError(f"Xhat and X must have matching shapes (got {Xhat.shape} and {X.shape})")
    W, _ = linalg.orthogonal_procrustes(X, Xhat)
    residual = Xhat - X @ W
    return AlignmentResult(
        W=W,
        residual_2inf=two_to_infty_norm(residual),
        residual_F=float(np.linalg.norm(residual)),
    )


def project_sphere(Xhat: np.ndarray) -> np.ndarray:
    """Divide every row by its Euclidean norm."""

    Xhat = np.asarray(Xhat, dtype=float)
    norms = np.linalg.norm(Xhat, axis=1)
    small = np.flatnonzero(norms <= ZERO_ROW_TOLERANCE)
    if small.size:
        raise ZeroRow(int(small[0]), float(norms[small[0]]))
    return Xhat / norms[:, None]


def two_to_infty_norm(M: np.ndarray) -> float:
    """Largest Euclidean row norm."""

    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, axis=1).max())


__all__ = [
    "AlignmentResult",
    "DENSE_MAX_N",
    "SpectralEmbedding",
    "align",
    "as_matrix",
    "ase",
    "eig_sym",
    "project_sphere",
    "two_to_infty_norm",
]
