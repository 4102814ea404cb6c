"""Mean-square-error (K-means) clustering, misclustering counts and the Φ objective."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

from .errors import PreconditionError, TooFewDistinctRows
from .schemas import MisclusterReport

logger = logging.getLogger(__name__)

DEFAULT_RESTARTS = 32
MAX_LLOYD_ITERATIONS = 500
RELATIVE_SSE_TOL = 1e-10
SSE_TIE_TOLERANCE = 1e-12

Loss = Union[Literal["square", "abs"], Tuple[Literal["power"], float], str]


@dataclass(frozen=True, slots=True, eq=False)
class ClusteringResult:
    """Best Lloyd run over all restarts.

    ``sse_history`` is the SSE after every Lloyd iteration of the winning
    restart; ``ties`` counts other restarts that reached the same SSE
    (within 1e-12) with a different partition.
    """

    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    restarts_used: int
    converged: bool
    sse_history: Tuple[float, ...] = ()
    ties: int = 0

    @property
    def K(self) -> int:
        return int(self.centroids.shape[0])


@dataclass(slots=True)
class _Run:
    centroids: np.ndarray
    labels: np.ndarray
    sse: float
    converged: bool
    history: List[float]


def count_distinct_rows(points: np.ndarray) -> int:
    return int(np.unique(points, axis=0).shape[0])


def _repair_empty(labels: np.ndarray, d2: np.ndarray, K: int) -> np.ndarray:
    """Hand every empty cluster the point farthest from its current centroid."""

    counts = np.bincount(labels, minlength=K)
    for k in np.flatnonzero(counts == 0):
        own = d2[np.arange(labels.size), labels]
        movable = counts[labels] > 1
        if not movable.any():
            break
        candidate = int(np.argmax(np.where(movable, own, -np.inf)))
        counts[labels[candidate]] -= 1
        labels[candidate] = k
        counts[k] += 1
        d2[candidate, :] = np.inf
        d2[candidate, k] = 0.0
    return labels


def _means(points: np.ndarray, labels: np.ndarray, K: int) -> np.ndarray:
    sums = np.zeros((K, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=K).astype(float)
    return sums / counts[:, None]


def _sse(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    diff = points - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float) -> _Run:
    K = centroids.shape[0]
    labels: Optional[np.ndarray] = None
    history: List[float] = []
    converged = False
    for _ in range(max_iter):
        d2 = cdist(points, centroids, "sqeuclidean")
        # argmin keeps the lowest centroid index on ties
        new_labels = _repair_empty(d2.argmin(axis=1), d2, K)
        centroids = _means(points, new_labels, K)
        history.append(_sse(points, centroids, new_labels))
        if labels is not None and np.array_equal(labels, new_labels):
            converged = True
        elif len(history) > 1:
            previous = history[-2]
            converged = previous - history[-1] <= tol * max(previous, np.finfo(float).tiny)
        labels = new_labels
        if converged:
            break
    assert labels is not None
    return _Run(centroids=centroids, labels=labels, sse=history[-1], converged=converged, history=history)


def _canonical_labels(run: _Run) -> _Run:
    """Renumber clusters in order of first appearance."""

    _, first = np.unique(run.labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    run.labels = remap[run.labels]
    run.centroids = run.centroids[order]
    return run


def restart_seed(seed: int, restart: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(restart,)).generate_state(1, dtype=np.uint32)
    return int(state[0])


def mse_cluster(
    points: np.ndarray,
    K: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    *,
    max_iter: int = MAX_LLOYD_ITERATIONS,
    tol: float = RELATIVE_SSE_TOL,
    workers: int = 1,
) -> ClusteringResult:
    """K-means with k-means++ seeding; best SSE over ``restarts`` Lloyd runs.

    Restart r draws its initial centroids from the stream (seed, r), so the
    result does not depend on ``workers``.
    """

    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if K < 1:
        raise PreconditionError(f"K must be at least 1 (got {K})")
    if restarts < 1:
        raise PreconditionError(f"restarts must be at least 1 (got {restarts})")
    distinct = count_distinct_rows(points)
    if K > distinct:
        raise TooFewDistinctRows(K, distinct)

    def _one(restart: int) -> _Run:
        initial, _ = kmeans_plusplus(points, n_clusters=K, random_state=restart_seed(seed, restart))
        return _canonical_labels(_lloyd(points, initial, max_iter, tol))

    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one, range(restarts)))
    else:
        runs = [_one(restart) for restart in range(restarts)]

    best_sse = min(run.sse for run in runs)
    best_index = next(i for i, run in enumerate(runs) if run.sse <= best_sse + SSE_TIE_TOLERANCE)
    best = runs[best_index]
    ties = sum(
        1
        for i, run in enumerate(runs)
        if i != best_index
        and abs(run.sse - best.sse) <= SSE_TIE_TOLERANCE
        and not np.array_equal(run.labels, best.labels)
    )
    logger.debug(
        "mse_cluster n=%d K=%d restarts=%d best restart %d sse=%.6g ties=%d",
        points.shape[0],
        K,
        restarts,
        best_index,
        best.sse,
        ties,
    )
    return ClusteringResult(
        centroids=best.centroids,
        labels=best.labels,
        sse=best.sse,
        restarts_used=restarts,
        converged=best.converged,
        sse_history=tuple(best.history),
        ties=ties,
    )


def misclustering_count(tau: Sequence[int], tau_hat: Sequence[int], K: int) -> MisclusterReport:
    """Minimum over relabelings of the number of disagreeing vertices.

    ``permutation[k]`` is the true label matched to estimated label k;
    ``confusion[i][j]`` counts vertices with true label i and estimate j.
    """

    tau = np.asarray(tau, dtype=np.int64)
    tau_hat = np.asarray(tau_hat, dtype=np.int64)
    if tau.shape != tau_hat.shape or tau.ndim != 1:
        raise PreconditionError(
            f"label vectors must be one-dimensional with equal length (got {tau.shape} and {tau_hat.shape})"
        )
    for name, labels in (("tau", tau), ("tau_hat", tau_hat)):
        bad = np.flatnonzero((labels < 0) | (labels >= K))
        if bad.size:
            raise PreconditionError(
                f"{name} labels must lie in [0, {K}) (got {int(labels[bad[0]])} at vertex {int(bad[0])})"
            )
    confusion = np.zeros((K, K), dtype=np.int64)
    np.add.at(confusion, (tau, tau_hat), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    permutation = [0] * K
    for true_label, estimated in zip(rows, cols):
        permutation[int(estimated)] = int(true_label)
    count = int(tau.size - confusion[rows, cols].sum())
    return MisclusterReport(count=count, permutation=permutation, confusion=confusion.tolist())


def _loss_values(distances_sq: np.ndarray, phi: Loss) -> np.ndarray:
    if phi == "square":
        return distances_sq
    if phi == "abs":
        return np.sqrt(distances_sq)
    if isinstance(phi, str) and phi.startswith("power:"):
        phi = ("power", float(phi.split(":", 1)[1]))
    if isinstance(phi, tuple) and len(phi) == 2 and phi[0] == "power":
        p = float(phi[1])
        if p < 1.0:
            raise PreconditionError(f"power loss needs p >= 1 (got p={p})")
        return np.sqrt(distances_sq) ** p
    raise PreconditionError(f"phi must be 'square', 'abs' or ('power', p) (got {phi!r})")


def phi_objective(points: np.ndarray, centers: np.ndarray, phi: Loss = "square") -> float:
    """Average over points of φ(distance to the nearest center)."""

    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    centers = np.asarray(centers, dtype=float)
    if centers.size == 0:
        raise PreconditionError("centers must contain at least one point")
    if centers.ndim == 1:
        centers = centers.reshape(-1, points.shape[1])
    nearest = cdist(points, centers, "sqeuclidean").min(axis=1)
    return float(_loss_values(nearest, phi).mean())


__all__ = [
    "ClusteringResult",
    "DEFAULT_RESTARTS",
    "count_distinct_rows",
    "misclustering_count",
    "mse_cluster",
    "phi_objective",
    "restart_seed",
]
