"""Pydantic schemas for model configs and the reports written by the harness."""

from __future__ import annotations

from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

Rate = Annotated[float, Field(ge=0.0, le=1.0)]


class UniformFactors(BaseModel):
    """Degree factors drawn i.i.d. Uniform(lo, hi)."""

    model_config = ConfigDict(extra="forbid")

    uniform: tuple[float, float]

    @field_validator("uniform")
    @classmethod
    def _inside_unit_interval(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError(f"uniform degree factors need 0 < lo <= hi < 1 (got [{lo}, {hi}])")
        return value


class ModelConfig(BaseModel):
    """JSON model description: block matrix, memberships and degree correction."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = "custom"
    K: Annotated[int, Field(ge=1)]
    B: Optional[List[float] | List[List[float]]] = None
    directions: Optional[List[List[float]]] = None
    block_sizes: Optional[List[Annotated[int, Field(ge=1)]]] = None
    block_fractions: Optional[List[Annotated[float, Field(gt=0.0)]]] = None
    tau: Optional[List[Annotated[int, Field(ge=0)]]] = None
    degree_factors: Optional[Union[List[float], UniformFactors]] = None
    seed: Annotated[int, Field(ge=0, lt=2**64)] = 0

    @model_validator(mode="after")
    def _consistent_shapes(self) -> "ModelConfig":
        if self.B is None and self.directions is None:
            raise ValueError("a model needs either B or directions")
        if self.B is not None:
            flat = _flatten(self.B)
            if len(flat) != self.K * self.K:
                raise ValueError(f"B must have K*K={self.K * self.K} entries (got {len(flat)})")
        if self.directions is not None and len(self.directions) != self.K:
            raise ValueError(f"directions must list K={self.K} vectors (got {len(self.directions)})")
        given = [name for name in ("block_sizes", "block_fractions", "tau") if getattr(self, name) is not None]
        if len(given) > 1:
            raise ValueError(f"give at most one of block_sizes, block_fractions, tau (got {', '.join(given)})")
        for name in ("block_sizes", "block_fractions"):
            value = getattr(self, name)
            if value is not None and len(value) != self.K:
                raise ValueError(f"{name} must have K={self.K} entries (got {len(value)})")
        return self

    @property
    def is_degree_corrected(self) -> bool:
        return self.degree_factors is not None

    def block_matrix(self) -> List[List[float]]:
        if self.B is not None:
            flat = _flatten(self.B)
            return [flat[row * self.K : (row + 1) * self.K] for row in range(self.K)]
        return [
            [sum(a * b for a, b in zip(left, right)) for right in self.directions]  # type: ignore[union-attr]
            for left in self.directions  # type: ignore[union-attr]
        ]


def _flatten(values: List[float] | List[List[float]]) -> List[float]:
    if values and isinstance(values[0], list):
        return [float(item) for row in values for item in row]  # type: ignore[union-attr]
    return [float(item) for item in values]  # type: ignore[arg-type]


class LatentDistributionConfig(BaseModel):
    """JSON description of an i.i.d. latent distribution."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = "custom"
    kind: Literal["point_mass", "segment"]
    atoms: Optional[List[List[float]]] = None
    weights: Optional[List[float]] = None
    start: Optional[List[float]] = None
    end: Optional[List[float]] = None

    @model_validator(mode="after")
    def _fields_for_kind(self) -> "LatentDistributionConfig":
        if self.kind == "point_mass" and (self.atoms is None or self.weights is None):
            raise ValueError("a point_mass distribution needs atoms and weights")
        if self.kind == "segment" and (self.start is None or self.end is None):
            raise ValueError("a segment distribution needs start and end")
        return self


class BoundEntry(BaseModel):
    name: str
    lhs: float
    rhs: float
    kind: Literal["deviation", "magnitude"] = "deviation"
    reference: str = ""

    @computed_field  # type: ignore[misc]
    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs)


class BoundReport(BaseModel):
    eta: float
    preconditions_hold: bool
    entries: List[BoundEntry]

    def entry(self, name: str) -> BoundEntry:
        for item in self.entries:
            if item.name == name:
                return item
        raise KeyError(name)

    def holds(self) -> Dict[str, bool]:
        return {item.name: item.holds for item in self.entries}


class AssumptionReport(BaseModel):
    """Numbers behind each perfect-clustering assumption; every flag is derived from them."""

    n: int
    eta: float
    d: int
    K: int
    n_min: int
    Delta: float
    gamma: float
    beta: float
    beta_hypothesis_violated: bool
    beta_terms: Dict[str, float] = Field(default_factory=dict)
    a0_min_relative_gap: float
    a1_min_separation: Optional[float] = None
    a1_threshold: float
    a2_gamma_n: float
    a2_threshold: float
    c_min: Optional[float] = None
    dcsbm_radius: Optional[float] = None
    dcsbm_threshold: Optional[float] = None

    @computed_field  # type: ignore[misc]
    @property
    def a0_distinct_eigenvalues(self) -> bool:
        return bool(self.a0_min_relative_gap > 1e-9)

    @computed_field  # type: ignore[misc]
    @property
    def a1_separation(self) -> bool:
        if self.a1_min_separation is None:
            return True
        return bool(self.a1_min_separation > self.a1_threshold)

    @computed_field  # type: ignore[misc]
    @property
    def a2_gap(self) -> bool:
        return bool(self.a2_gamma_n > self.a2_threshold)

    @computed_field  # type: ignore[misc]
    @property
    def dcsbm_condition(self) -> Optional[bool]:
        if self.dcsbm_radius is None or self.dcsbm_threshold is None:
            return None
        return bool(self.dcsbm_radius > self.dcsbm_threshold and self.a2_gap)


class MisclusterReport(BaseModel):
    count: int
    permutation: List[int]
    confusion: List[List[int]]


class SlopeFit(BaseModel):
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    points: int


class NSummary(BaseModel):
    n: int
    trials: int
    degenerate: int
    mean_err_2inf: float
    stderr_err_2inf: float
    perfect_clustering_rate: Rate
    certificate_rate: Rate
    beta: float
    bound_hold_rates: Dict[str, Rate] = Field(default_factory=dict)


class SweepSummary(BaseModel):
    model_id: str
    n_grid: List[int]
    trials_per_n: int
    base_seed: int
    per_n: List[NSummary]
    fit: Optional[SlopeFit] = None

    @computed_field  # type: ignore[misc]
    @property
    def degenerate_rate(self) -> float:
        total = sum(item.trials for item in self.per_n)
        return 0.0 if total == 0 else sum(item.degenerate for item in self.per_n) / total


class SparseRegimeRow(BaseModel):
    """Reduced sparse-regime inequalities at one n, kept as log ratios lhs/rhs."""

    n: float
    a: float
    b: float
    a1_log_ratio: float
    a2_log_ratio: float

    @computed_field  # type: ignore[misc]
    @property
    def a1_holds(self) -> bool:
        return bool(self.a1_log_ratio > 0.0)

    @computed_field  # type: ignore[misc]
    @property
    def a2_holds(self) -> bool:
        return bool(self.a2_log_ratio > 0.0)


class SparseRegimeReport(BaseModel):
    a_expr: str
    b_expr: str
    eta: float
    case: Optional[int] = None
    case_description: str
    predicted_a1: Optional[bool] = None
    predicted_a2: Optional[bool] = None
    rows: List[SparseRegimeRow]


class ConsistencySummaryRow(BaseModel):
    n: int
    trials: int
    mean_phi_true: float
    mean_phi_embedded: float
    degenerate: int = 0
    mean_gap: float


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
