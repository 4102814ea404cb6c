"""Serializable configs and reports."""

from .reports import (
    AssumptionReport,
    BoundEntry,
    BoundReport,
    ConsistencySummaryRow,
    LatentDistributionConfig,
    MisclusterReport,
    ModelConfig,
    NSummary,
    SlopeFit,
    SparseRegimeReport,
    SparseRegimeRow,
    SweepSummary,
    UniformFactors,
)

__all__ = [
    "AssumptionReport",
    "BoundEntry",
    "BoundReport",
    "ConsistencySummaryRow",
    "LatentDistributionConfig",
    "MisclusterReport",
    "ModelConfig",
    "NSummary",
    "SlopeFit",
    "SparseRegimeReport",
    "SparseRegimeRow",
    "SweepSummary",
    "UniformFactors",
]
