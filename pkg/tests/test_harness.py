import math

import numpy as np
import pandas as pd
import pytest

from core.bounds import BOUND_NAMES, beta_terms, model_constants
from core.errors import PreconditionError
from core.graph_models import block_spec_from_config, sbm_to_latent
from core.harness import (
    RECORD_COLUMNS,
    TrialRecord,
    TrialSettings,
    consistency_experiment,
    derive_seed,
    fit_slope,
    records_frame,
    run_trial,
    sweep,
    trial_streams,
)
from core.presets import DISTRIBUTION_PRESETS, MODEL_PRESETS, build_distribution

FAST = TrialSettings(restarts=4)


def _decaying_trial(config, n, seed, settings, *, trial=0):
    return TrialRecord(
        model_id=config.id,
        n=n,
        trial=trial,
        seed=seed,
        err_2inf=3.0 / math.sqrt(n),
        miscluster_count=0,
        certificate=True,
        beta=1.0,
    )


def _flaky_trial(config, n, seed, settings, *, trial=0):
    record = _decaying_trial(config, n, seed, settings, trial=trial)
    if trial == 0:
        return TrialRecord(model_id=config.id, n=n, trial=trial, seed=seed, degenerate=True, degenerate_reason="ZeroRow")
    return record


def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(0, 250, 1) == derive_seed(0, 250, 1)
    assert len({derive_seed(0, 250, t) for t in range(50)}) == 50
    assert derive_seed(0, 250, 1) != derive_seed(1, 250, 1)


def test_trial_streams_are_distinct():
    model, graph, cluster = trial_streams(123)
    assert len({model, graph, cluster}) == 3
    assert trial_streams(123) == (model, graph, cluster)


def test_run_trial_produces_a_certified_record():
    record = run_trial(MODEL_PRESETS["sbm-dense"], 200, seed=4, settings=FAST, trial=2)
    assert not record.degenerate
    assert record.trial == 2 and record.n == 200
    assert record.certificate
    assert record.cluster_residual_F == pytest.approx(math.sqrt(record.sse))
    assert 0 < record.err_2inf <= record.err_F
    assert set(record.bounds) == set(BOUND_NAMES[:9])
    assert record.labels is not None and record.labels.shape == (200,)


def test_run_trial_is_reproducible():
    first = run_trial(MODEL_PRESETS["sbm-three-block"], 150, seed=8, settings=FAST)
    second = run_trial(MODEL_PRESETS["sbm-three-block"], 150, seed=8, settings=FAST)
    assert first == second
    assert np.array_equal(first.labels, second.labels)


def test_noiseless_trial_recovers_everything():
    record = run_trial(MODEL_PRESETS["sbm-dense"], 200, seed=0, settings=FAST, noiseless=True)
    assert record.err_F <= 1e-8
    assert record.miscluster_count == 0
    assert record.bounds["two_to_infinity"][0] <= 1e-8


def test_dcsbm_trial_clusters_on_the_sphere():
    record = run_trial(MODEL_PRESETS["dcsbm-sphere"], 300, seed=1, settings=FAST)
    assert not record.degenerate
    assert "sphere_two_to_infinity" in record.bounds
    assert record.certificate


def test_sweep_recovers_inverse_square_root_decay():
    result = sweep(MODEL_PRESETS["sbm-dense"], [250, 500, 1000, 2000], 3, 0, trial_fn=_decaying_trial)
    fit = result.summary.fit
    assert fit is not None
    assert fit.slope == pytest.approx(-0.5, abs=1e-9)
    assert fit.ci_low <= fit.slope <= fit.ci_high
    assert [item.n for item in result.summary.per_n] == [250, 500, 1000, 2000]


def test_sweep_uses_cell_seeds_in_sorted_order():
    result = sweep(MODEL_PRESETS["sbm-dense"], [100, 200], 2, 7, parallelism=3, trial_fn=_decaying_trial)
    keys = [(r.n, r.trial, r.seed) for r in result.records]
    assert keys == [(n, t, derive_seed(7, n, t)) for n in (100, 200) for t in range(2)]


def test_sweep_keeps_degenerate_trials_out_of_the_means():
    result = sweep(MODEL_PRESETS["sbm-dense"], [100], 3, 0, trial_fn=_flaky_trial)
    (summary,) = result.summary.per_n
    assert summary.degenerate == 1
    assert summary.mean_err_2inf == pytest.approx(0.3)
    assert result.summary.degenerate_rate == pytest.approx(1 / 3)


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(PreconditionError, match="strictly ascending"):
        sweep(MODEL_PRESETS["sbm-dense"], [200, 100], 1, 0, trial_fn=_decaying_trial)


def test_sweep_is_independent_of_parallelism():
    config = MODEL_PRESETS["sbm-dense"]
    serial = sweep(config, [80, 120], 2, 3, parallelism=1, settings=FAST)
    threaded = sweep(config, [80, 120], 2, 3, parallelism=8, settings=FAST)
    pd.testing.assert_frame_equal(records_frame(serial.records), records_frame(threaded.records))
    assert serial.summary == threaded.summary


def test_records_frame_has_the_documented_columns():
    frame = records_frame([_decaying_trial(MODEL_PRESETS["sbm-dense"], 100, 1, FAST)])
    assert tuple(frame.columns) == RECORD_COLUMNS
    assert str(frame["miscluster_count"].dtype) == "Int64"


def test_fit_slope_edge_cases():
    assert fit_slope([100], [0.1]) is None
    two = fit_slope([100, 400], [0.2, 0.1])
    assert two.slope == pytest.approx(-0.5)
    assert two.ci_low == two.ci_high == two.slope


def test_consistency_experiment_on_point_masses():
    dist = build_distribution(DISTRIBUTION_PRESETS["point-mass-pair"])
    result = consistency_experiment(dist, [150, 300], 2, 2, seed=1, restarts=4)
    assert [row.n for row in result.summary] == [150, 300]
    for record in result.records:
        assert record.phi_true == pytest.approx(0.0, abs=1e-20)
        assert record.gap == pytest.approx(record.phi_embedded)
    assert set(result.gaps(300)) <= {0, 1}


def test_consistency_experiment_is_seed_reproducible():
    dist = build_distribution(DISTRIBUTION_PRESETS["segment"])
    first = consistency_experiment(dist, [120], 2, 2, seed=5, restarts=4)
    second = consistency_experiment(dist, [120], 2, 2, seed=5, restarts=4, parallelism=2)
    assert first.records == second.records


def test_run_trial_records_beta_terms():
    config = MODEL_PRESETS["sbm-dense"]
    record = run_trial(config, 200, seed=6, settings=FAST)
    spec = block_spec_from_config(config, 200)
    constants = model_constants(sbm_to_latent(spec), spec.tau)
    terms = beta_terms(2, 200, FAST.eta, constants.Delta, constants.gamma)
    assert record.beta_projection == pytest.approx(terms["projection"])
    assert record.beta_eigenvalue == pytest.approx(terms["eigenvalue"])
    assert record.beta_noise == pytest.approx(terms["noise"])
    assert record.bounds["projection_residual"][1] == pytest.approx(record.beta_projection)


def test_mean_error_decreases_along_the_grid():
    result = sweep(MODEL_PRESETS["sbm-dense"], [100, 400, 1600], 3, 11, settings=FAST)
    means = [item.mean_err_2inf for item in result.summary.per_n]
    assert all(later < earlier for earlier, later in zip(means, means[1:]))


def test_degree_corrected_preset_mostly_clusters_perfectly():
    settings = TrialSettings(restarts=4, solver="lanczos")
    result = sweep(MODEL_PRESETS["dcsbm-sphere"], [2000], 3, 2, settings=settings)
    perfect = sum(record.miscluster_count == 0 for record in result.records if not record.degenerate)
    assert perfect >= 2


def test_consistency_experiment_on_a_single_point_mass():
    dist = build_distribution(DISTRIBUTION_PRESETS["point-mass-single"])
    result = consistency_experiment(dist, [100, 400], 1, 2, seed=3, restarts=2)
    for record in result.records:
        assert record.phi_true == pytest.approx(0.0, abs=1e-20)
    small, large = result.summary
    assert 0.0 < large.mean_phi_embedded < small.mean_phi_embedded < 0.05
