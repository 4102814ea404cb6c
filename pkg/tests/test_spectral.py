import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ortho_group

from core.errors import EigenSolverError, NonPositiveSpectrum, PreconditionError, ZeroRow
from core.graph_models import block_spec_from_config, sample_adjacency, sbm_to_latent
from core.presets import MODEL_PRESETS
from core.spectral import align, ase, eig_sym, project_sphere, two_to_infty_norm


def _latent(preset: str, n: int):
    spec = block_spec_from_config(MODEL_PRESETS[preset], n, seed=0)
    return spec, sbm_to_latent(spec)


def test_eig_sym_returns_top_eigenpairs_descending():
    M = np.diag([1.0, 5.0, 3.0, -2.0])
    values, vectors = eig_sym(M, 2)
    assert values.tolist() == [5.0, 3.0]
    assert np.allclose(np.abs(vectors[:, 0]), [0, 1, 0, 0])
    assert np.allclose(np.abs(vectors[:, 1]), [0, 0, 1, 0])


def test_eig_sym_fixes_signs():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    _, vectors = eig_sym(M, 1)
    assert vectors[0, 0] > 0


def test_eig_sym_is_repeatable_on_ties():
    first = eig_sym(np.eye(5), 2)
    second = eig_sym(np.eye(5), 2)
    assert np.allclose(first[0], [1.0, 1.0])
    assert np.array_equal(first[1], second[1])


def test_lanczos_matches_dense_solver():
    _, X = _latent("sbm-three-block", 300)
    A = sample_adjacency(X, seed=9).to_dense()
    dense_values, dense_vectors = eig_sym(A, 3, method="dense")
    lanczos_values, lanczos_vectors = eig_sym(A, 3, method="lanczos", seed=4)
    assert np.allclose(dense_values, lanczos_values, rtol=1e-10, atol=0.0)
    assert np.allclose(dense_vectors, lanczos_vectors, atol=1e-6)


def test_eig_sym_preconditions():
    with pytest.raises(PreconditionError, match="square"):
        eig_sym(np.zeros((2, 3)), 1)
    with pytest.raises(PreconditionError, match="d must lie"):
        eig_sym(np.eye(3), 4)
    with pytest.raises(PreconditionError, match="symmetric"):
        eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)


@pytest.mark.parametrize("preset", sorted(MODEL_PRESETS))
def test_noiseless_embedding_recovers_latent_positions(preset):
    _, X = _latent(preset, 240)
    embedding = ase(X.probabilities(), X.d)
    alignment = align(embedding.Xhat, X.rows)
    assert alignment.residual_F <= 1e-8
    assert np.allclose(alignment.W.T @ alignment.W, np.eye(X.d), atol=1e-12)


def test_ase_accepts_adjacency_samples_and_sparse_matrices():
    _, X = _latent("sbm-dense", 200)
    A = sample_adjacency(X, seed=1)
    from_sample = ase(A, 2)
    from_sparse = ase(A.to_sparse(), 2, method="dense")
    assert np.allclose(from_sample.Xhat, from_sparse.Xhat)
    assert from_sample.eigenvalues[0] > from_sample.eigenvalues[1] > 0


def test_ase_rejects_nonpositive_spectrum():
    with pytest.raises(NonPositiveSpectrum) as info:
        ase(np.zeros((4, 4)), 1)
    assert info.value.index == 0
    with pytest.raises(NonPositiveSpectrum):
        ase(-np.eye(3), 1)


def test_ase_rejects_dimension_above_n():
    with pytest.raises(PreconditionError, match="d must not exceed"):
        ase(np.eye(2), 3)


def test_align_recovers_rotation():
    rng = np.random.default_rng(0)
    X = rng.uniform(0.1, 0.5, size=(50, 3))
    Q = ortho_group.rvs(3, random_state=1)
    result = align(X @ Q, X)
    assert np.allclose(result.W, Q, atol=1e-10)
    assert result.residual_F < 1e-10
    assert result.residual_2inf < 1e-10


def test_align_shape_mismatch():
    with pytest.raises(PreconditionError, match="matching shapes"):
        align(np.zeros((3, 2)), np.zeros((3, 3)))


@given(
    arrays(np.float64, (12, 2), elements=st.floats(-1, 1)),
    arrays(np.float64, (12, 2), elements=st.floats(-1, 1)),
)
@settings(max_examples=60, deadline=None)
def test_alignment_never_worse_than_identity(Xhat, X):
    result = align(Xhat, X)
    assert result.residual_F <= np.linalg.norm(Xhat - X) + 1e-9
    assert result.residual_2inf <= result.residual_F + 1e-12


def test_project_sphere_normalises_rows():
    Y = project_sphere(np.array([[3.0, 4.0], [0.0, 2.0]]))
    assert np.allclose(Y, [[0.6, 0.8], [0.0, 1.0]])
    assert np.allclose(np.linalg.norm(Y, axis=1), 1.0, atol=1e-12)


def test_project_sphere_rejects_zero_rows():
    with pytest.raises(ZeroRow) as info:
        project_sphere(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert info.value.index == 1


def test_two_to_infty_norm():
    assert two_to_infty_norm(np.array([[3.0, 4.0], [1.0, 0.0]])) == 5.0
    assert two_to_infty_norm(np.zeros((0, 2))) == 0.0


def _charpoly(M):
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion."""

    n = M.shape[0]
    coeffs = [1.0]
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(M @ Mk) / k)
    return np.asarray(coeffs)


def test_complete_graph_eigenpair_and_embedding():
    K4 = np.ones((4, 4)) - np.eye(4)
    values, vectors = eig_sym(K4, 1)
    assert values[0] == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(vectors[:, 0], 0.5, atol=1e-12)
    embedding = ase(K4, 1)
    assert np.allclose(embedding.Xhat, np.sqrt(3.0) / 2.0, atol=1e-12)


def test_eig_sym_matches_characteristic_polynomial_roots():
    S = np.random.default_rng(6).uniform(-1.0, 1.0, size=(6, 6))
    M = (S + S.T) / 2.0
    roots = np.sort(np.roots(_charpoly(M)).real)[::-1]
    values, _ = eig_sym(M, 6)
    assert np.allclose(values, roots, rtol=0.0, atol=1e-8)


def test_eig_sym_recovers_rank_of_noiseless_probabilities():
    _, X = _latent("sbm-three-block", 120)
    values, _ = eig_sym(X.probabilities(), 120)
    norm = float(np.abs(values).max())
    assert int(np.sum(values > 1e-8 * norm)) == 3
    assert np.all(np.abs(values[3:]) <= 1e-8 * norm)


def test_eig_sym_residual_scale_is_reported():
    S = np.random.default_rng(2).normal(size=(6, 6))
    with pytest.raises(EigenSolverError, match="largest retained"):
        eig_sym(S + S.T, 2, tol=0.0)


def test_project_sphere_is_idempotent():
    rows = np.random.default_rng(3).uniform(0.1, 1.0, size=(40, 3))
    once = project_sphere(rows)
    assert np.allclose(project_sphere(once), once, rtol=0.0, atol=1e-12)
    y1 = np.array([[0.2, 2.0 * np.sqrt(6.0) / 5.0]])
    assert np.allclose(project_sphere(y1), y1, rtol=0.0, atol=1e-12)


def test_sphere_error_is_controlled_by_the_embedding_error():
    spec, X = _latent("dcsbm-sphere", 200)
    c_min = float(spec.degree_factors.min())
    for seed in range(5):
        embedding = ase(sample_adjacency(X, seed=seed), X.d)
        alignment = align(embedding.Xhat, X.rows)
        sphere_error = two_to_infty_norm(project_sphere(embedding.Xhat) - project_sphere(X.rows @ alignment.W))
        assert sphere_error <= 2.0 * alignment.residual_2inf / c_min + 1e-12


def test_embedding_gram_does_not_depend_on_lanczos_start():
    _, X = _latent("sbm-dense", 300)
    A = sample_adjacency(X, seed=5)
    first = ase(A, 2, method="lanczos", seed=1)
    second = ase(A, 2, method="lanczos", seed=2)
    assert np.allclose(first.Xhat @ first.Xhat.T, second.Xhat @ second.Xhat.T, rtol=0.0, atol=1e-10)
