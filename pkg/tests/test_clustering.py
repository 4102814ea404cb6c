import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.clustering import count_distinct_rows, misclustering_count, mse_cluster, phi_objective
from core.errors import PreconditionError, TooFewDistinctRows


def _blobs(seed: int = 0, per_cluster: int = 40) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    labels = np.repeat(np.arange(3), per_cluster)
    return centers[labels] + rng.normal(scale=0.3, size=(labels.size, 2)), labels


def _brute_force_sse(points: np.ndarray, K: int) -> float:
    best = np.inf
    for assignment in itertools.product(range(K), repeat=points.shape[0]):
        labels = np.asarray(assignment)
        if np.unique(labels).size != K:
            continue
        sse = sum(((points[labels == k] - points[labels == k].mean(axis=0)) ** 2).sum() for k in range(K))
        best = min(best, sse)
    return float(best)


def _enumerated_misclustering(tau: np.ndarray, tau_hat: np.ndarray, K: int) -> int:
    return min(int(np.sum(tau != np.asarray(perm)[tau_hat])) for perm in itertools.permutations(range(K)))


def test_mse_cluster_separates_blobs():
    points, truth = _blobs()
    result = mse_cluster(points, 3, restarts=8, seed=1)
    assert misclustering_count(truth, result.labels, 3).count == 0
    assert result.converged
    assert result.labels[0] == 0
    assert result.K == 3


def test_mse_cluster_sse_history_is_nonincreasing():
    points, _ = _blobs(seed=2)
    history = np.asarray(mse_cluster(points, 3, restarts=4, seed=0).sse_history)
    assert np.all(np.diff(history) <= 1e-12)


def test_mse_cluster_is_independent_of_worker_count():
    points, _ = _blobs(seed=3)
    serial = mse_cluster(points, 3, restarts=16, seed=5, workers=1)
    threaded = mse_cluster(points, 3, restarts=16, seed=5, workers=4)
    assert np.array_equal(serial.labels, threaded.labels)
    assert serial.sse == threaded.sse


def test_mse_cluster_rejects_too_few_distinct_rows():
    points = np.ones((10, 2))
    with pytest.raises(TooFewDistinctRows) as info:
        mse_cluster(points, 2)
    assert info.value.k == 2 and info.value.distinct == 1


def test_mse_cluster_handles_duplicate_rows_at_capacity():
    points = np.array([[0.0], [0.0], [1.0], [5.0]])
    result = mse_cluster(points, 3, restarts=4)
    assert result.sse == pytest.approx(0.0, abs=1e-15)
    assert np.unique(result.labels).size == 3


def test_mse_cluster_preconditions():
    with pytest.raises(PreconditionError, match="K must be at least 1"):
        mse_cluster(np.zeros((3, 1)), 0)
    with pytest.raises(PreconditionError, match="restarts"):
        mse_cluster(np.arange(3.0), 1, restarts=0)


def test_count_distinct_rows():
    assert count_distinct_rows(np.array([[1, 2], [1, 2], [3, 4]])) == 2


def test_mse_cluster_matches_exhaustive_minimum():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(3, 9))
        K = int(rng.integers(1, 4))
        points = rng.uniform(size=(n, 2))
        result = mse_cluster(points, K, restarts=32, seed=int(rng.integers(2**32)))
        assert result.sse == pytest.approx(_brute_force_sse(points, K), rel=1e-9, abs=1e-12)


def test_misclustering_count_matches_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        K = int(rng.integers(1, 6))
        n = int(rng.integers(1, 30))
        tau = rng.integers(0, K, size=n)
        tau_hat = rng.integers(0, K, size=n)
        report = misclustering_count(tau, tau_hat, K)
        assert report.count == _enumerated_misclustering(tau, tau_hat, K)
        relabelled = np.asarray(report.permutation)[tau_hat]
        assert int(np.sum(relabelled != tau)) == report.count


def test_misclustering_count_is_label_invariant():
    tau = np.array([0, 0, 1, 1, 2, 2])
    report = misclustering_count(tau, np.array([2, 2, 0, 0, 1, 1]), 3)
    assert report.count == 0
    assert report.permutation == [1, 2, 0]
    assert np.trace(np.asarray(report.confusion)) == 0


def test_misclustering_count_rejects_out_of_range_labels():
    with pytest.raises(PreconditionError, match=r"tau_hat labels must lie in \[0, 2\)"):
        misclustering_count([0, 1], [0, 2], 2)
    with pytest.raises(PreconditionError, match="equal length"):
        misclustering_count([0, 1], [0], 2)


@given(
    st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=40),
    st.permutations([0, 1, 2, 3]),
)
@settings(max_examples=100, deadline=None)
def test_misclustering_count_ignores_relabelling(tau, perm):
    tau = np.asarray(tau)
    assert misclustering_count(tau, np.asarray(perm)[tau], 4).count == 0


def test_phi_objective_losses():
    points = np.array([[0.0, 0.0], [3.0, 4.0]])
    centers = np.array([[0.0, 0.0]])
    assert phi_objective(points, centers) == pytest.approx(12.5)
    assert phi_objective(points, centers, "abs") == pytest.approx(2.5)
    assert phi_objective(points, centers, ("power", 3)) == pytest.approx(62.5)
    assert phi_objective(points, centers, "power:3") == pytest.approx(62.5)


def test_phi_objective_rejects_bad_inputs():
    with pytest.raises(PreconditionError, match="at least one point"):
        phi_objective(np.zeros((2, 2)), np.zeros((0, 2)))
    with pytest.raises(PreconditionError, match="p >= 1"):
        phi_objective(np.zeros((2, 2)), np.zeros((1, 2)), ("power", 0.5))
    with pytest.raises(PreconditionError, match="phi must be"):
        phi_objective(np.zeros((2, 2)), np.zeros((1, 2)), "cube")


def test_phi_vanishes_for_point_masses_at_their_optimum():
    atoms = np.array([[0.5, 0.4], [0.5, -0.4]])
    points = atoms[np.random.default_rng(0).integers(0, 2, size=200)]
    result = mse_cluster(points, 2, restarts=4)
    assert phi_objective(points, result.centroids) == pytest.approx(0.0, abs=1e-20)
