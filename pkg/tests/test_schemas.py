import pytest
from pydantic import ValidationError

from core.schemas import (
    AssumptionReport,
    BoundEntry,
    BoundReport,
    LatentDistributionConfig,
    ModelConfig,
    NSummary,
    SparseRegimeRow,
    SweepSummary,
    UniformFactors,
)


def _assumptions(**overrides):
    fields = dict(
        n=1000,
        eta=0.05,
        d=2,
        K=2,
        n_min=500,
        Delta=250.0,
        gamma=0.1,
        beta=0.5,
        beta_hypothesis_violated=False,
        a0_min_relative_gap=0.3,
        a1_min_separation=0.8,
        a1_threshold=0.6,
        a2_gamma_n=100.0,
        a2_threshold=90.0,
    )
    fields.update(overrides)
    return AssumptionReport(**fields)


def test_model_config_accepts_flat_and_nested_block_matrix():
    flat = ModelConfig(K=2, B=[0.5, 0.1, 0.1, 0.4])
    nested = ModelConfig(K=2, B=[[0.5, 0.1], [0.1, 0.4]])
    assert flat.block_matrix() == nested.block_matrix() == [[0.5, 0.1], [0.1, 0.4]]
    assert not flat.is_degree_corrected


def test_model_config_builds_block_matrix_from_directions():
    config = ModelConfig(K=2, directions=[[0.6, 0.0], [0.0, 0.5]])
    assert config.block_matrix() == [[pytest.approx(0.36), 0.0], [0.0, pytest.approx(0.25)]]


@pytest.mark.parametrize(
    "payload, match",
    [
        ({"K": 2}, "either B or directions"),
        ({"K": 2, "B": [0.5, 0.1, 0.1]}, "K\\*K=4"),
        ({"K": 2, "directions": [[0.5, 0.5]]}, "K=2 vectors"),
        ({"K": 2, "B": [0.5, 0.1, 0.1, 0.4], "block_sizes": [1, 1], "tau": [0, 1]}, "at most one"),
        ({"K": 2, "B": [0.5, 0.1, 0.1, 0.4], "block_fractions": [1.0]}, "block_fractions must have K=2"),
        ({"K": 2, "B": [0.5, 0.1, 0.1, 0.4], "colour": "red"}, "Extra inputs"),
    ],
)
def test_model_config_rejects_inconsistent_payloads(payload, match):
    with pytest.raises(ValidationError, match=match):
        ModelConfig(**payload)


def test_uniform_factors_must_stay_inside_unit_interval():
    assert UniformFactors(uniform=(0.2, 0.5)).uniform == (0.2, 0.5)
    with pytest.raises(ValidationError, match="0 < lo <= hi < 1"):
        UniformFactors(uniform=(0.5, 0.2))
    config = ModelConfig(K=2, B=[0.5, 0.1, 0.1, 0.4], degree_factors={"uniform": [0.2, 0.5]})
    assert config.is_degree_corrected


def test_latent_distribution_requires_fields_for_its_kind():
    with pytest.raises(ValidationError, match="atoms and weights"):
        LatentDistributionConfig(kind="point_mass", atoms=[[0.5]])
    with pytest.raises(ValidationError, match="start and end"):
        LatentDistributionConfig(kind="segment", start=[0.1])


def test_assumption_flags_are_derived_from_numbers():
    report = _assumptions()
    assert report.a0_distinct_eigenvalues and report.a1_separation and report.a2_gap
    assert report.dcsbm_condition is None
    assert not _assumptions(a2_gamma_n=80.0).a2_gap
    assert not _assumptions(a1_min_separation=0.5).a1_separation
    assert _assumptions(a1_min_separation=None).a1_separation
    assert not _assumptions(a0_min_relative_gap=0.0).a0_distinct_eigenvalues
    assert _assumptions(dcsbm_radius=0.3, dcsbm_threshold=0.2).dcsbm_condition
    assert "a2_gap" in _assumptions().model_dump()


def test_bound_entry_holds_and_report_lookup():
    report = BoundReport(
        eta=0.05,
        preconditions_hold=True,
        entries=[BoundEntry(name="tight", lhs=1.0, rhs=1.0), BoundEntry(name="loose", lhs=2.0, rhs=1.0)],
    )
    assert report.holds() == {"tight": True, "loose": False}
    assert report.entry("loose").lhs == 2.0
    with pytest.raises(KeyError):
        report.entry("missing")


def test_sparse_row_flags_follow_log_ratio_sign():
    row = SparseRegimeRow(n=1e6, a=10.0, b=5.0, a1_log_ratio=-0.1, a2_log_ratio=0.2)
    assert not row.a1_holds
    assert row.a2_holds


def test_sweep_summary_degenerate_rate():
    per_n = [
        NSummary(
            n=n,
            trials=4,
            degenerate=degenerate,
            mean_err_2inf=0.1,
            stderr_err_2inf=0.0,
            perfect_clustering_rate=1.0,
            certificate_rate=1.0,
            beta=1.0,
        )
        for n, degenerate in ((100, 1), (200, 0))
    ]
    summary = SweepSummary(model_id="m", n_grid=[100, 200], trials_per_n=4, base_seed=0, per_n=per_n)
    assert summary.degenerate_rate == pytest.approx(1 / 8)
    with pytest.raises(ValidationError):
        NSummary(**{**per_n[0].model_dump(), "certificate_rate": 1.5})
