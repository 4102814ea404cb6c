"""Built-in model and latent-distribution presets, and resolution of ``--model`` arguments."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Union

import orjson
from pydantic import ValidationError

from .errors import ModelValidationError
from .graph_models import LatentDistribution, PointMassMixture, SegmentUniform
from .schemas import LatentDistributionConfig, ModelConfig

_ROOT6 = 2.0 * math.sqrt(6.0) / 5.0

MODEL_PRESETS: Dict[str, ModelConfig] = {
    "sbm-dense": ModelConfig(
        id="sbm-dense",
        K=2,
        B=[[0.41, 0.09], [0.09, 0.41]],
        block_fractions=[0.5, 0.5],
    ),
    "dcsbm-sphere": ModelConfig(
        id="dcsbm-sphere",
        K=2,
        directions=[[0.2, _ROOT6], [_ROOT6, 0.2]],
        block_fractions=[0.5, 0.5],
        degree_factors={"uniform": (0.2, 0.5)},
    ),
    "sbm-three-block": ModelConfig(
        id="sbm-three-block",
        K=3,
        B=[[0.5, 0.2, 0.1], [0.2, 0.4, 0.15], [0.1, 0.15, 0.3]],
        block_fractions=[0.4, 0.35, 0.25],
    ),
}

DISTRIBUTION_PRESETS: Dict[str, LatentDistributionConfig] = {
    "point-mass-single": LatentDistributionConfig(
        id="point-mass-single", kind="point_mass", atoms=[[0.6]], weights=[1.0]
    ),
    "point-mass-pair": LatentDistributionConfig(
        id="point-mass-pair", kind="point_mass", atoms=[[0.5, 0.4], [0.5, -0.4]], weights=[0.5, 0.5]
    ),
    "segment": LatentDistributionConfig(id="segment", kind="segment", start=[0.3, 0.1], end=[0.5, 0.3]),
}


def _load_json(path: Path, what: str) -> dict:
    if not path.exists():
        raise FileNotFoundError(f"{what} must be a preset name or an existing JSON file (got '{path}')")
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ModelValidationError(f"{what} file '{path}' is not valid JSON: {exc}") from exc


def resolve_model(name_or_path: Union[str, Path]) -> ModelConfig:
    """Return a preset by name, or parse a JSON model config from disk."""

    key = str(name_or_path)
    if key in MODEL_PRESETS:
        return MODEL_PRESETS[key]
    payload = _load_json(Path(key), "--model")
    try:
        return ModelConfig.model_validate(payload)
    except ValidationError as exc:
        raise ModelValidationError(f"invalid model config '{key}': {exc}") from exc


def resolve_distribution(name_or_path: Union[str, Path]) -> LatentDistributionConfig:
    key = str(name_or_path)
    if key in DISTRIBUTION_PRESETS:
        return DISTRIBUTION_PRESETS[key]
    payload = _load_json(Path(key), "--distribution")
    try:
        return LatentDistributionConfig.model_validate(payload)
    except ValidationError as exc:
        raise ModelValidationError(f"invalid distribution config '{key}': {exc}") from exc


def build_distribution(config: LatentDistributionConfig) -> LatentDistribution:
    if config.kind == "point_mass":
        return PointMassMixture(atoms=config.atoms, weights=config.weights)  # type: ignore[arg-type]
    return SegmentUniform(start=config.start, end=config.end)  # type: ignore[arg-type]


__all__ = [
    "DISTRIBUTION_PRESETS",
    "MODEL_PRESETS",
    "build_distribution",
    "resolve_distribution",
    "resolve_model",
]
