"""Configuration loader for the ase-cluster CLI."""

from __future__ import annotations

import logging
import logging.config
from pathlib import Path
from typing import Any, List, Literal, Optional

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.harness import DEFAULT_ETA, DEFAULT_N_GRID, DEFAULT_TRIALS, TrialSettings

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_DIR = REPO_ROOT / "config"


class EnvSettings(BaseSettings):
    """ASECLUSTER_* environment variables, optionally from a .env file."""

    model_config = SettingsConfigDict(env_prefix="ASECLUSTER_", env_file=".env", extra="ignore")

    threads: int = Field(default=1, ge=1)
    runs_dir: Path = Path(".ase-cluster")
    config: Optional[Path] = None


class SpectralConfig(BaseModel):
    solver: Literal["auto", "dense", "lanczos"] = "auto"
    dense_max_n: int = Field(default=4096, ge=1)


class ClusteringConfig(BaseModel):
    restarts: int = Field(default=32, ge=1)
    workers: int = Field(default=1, ge=1)


class HarnessConfig(BaseModel):
    eta: float = Field(default=DEFAULT_ETA, gt=0.0, lt=0.5)
    n_grid: List[int] = Field(default_factory=lambda: list(DEFAULT_N_GRID))
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    base_seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("n_grid")
    @classmethod
    def _ascending(cls, value: List[int]) -> List[int]:
        if not value or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"n_grid must be a non-empty strictly ascending list (got {value})")
        return value


class OutputConfig(BaseModel):
    float_format: str = "%.17g"
    plot: bool = False


class Settings(BaseModel):
    env: EnvSettings
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    clustering: ClusteringConfig = Field(default_factory=ClusteringConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging_config: Path = DEFAULT_CONFIG_DIR / "logging.toml"

    def trial_settings(
        self,
        *,
        eta: Optional[float] = None,
        restarts: Optional[int] = None,
        d: Optional[int] = None,
    ) -> TrialSettings:
        return TrialSettings(
            eta=self.harness.eta if eta is None else eta,
            restarts=self.clustering.restarts if restarts is None else restarts,
            d=d,
            solver=self.spectral.solver,
            dense_max_n=self.spectral.dense_max_n,
            cluster_workers=self.clustering.workers,
        )


def _load_toml(path: Path) -> dict[str, Any]:
    with path.open("rb") as handle:
        return tomllib.load(handle)


def load_settings(config_path: Optional[Path] = None) -> Settings:
    """Environment first, then harness.toml (``ASECLUSTER_CONFIG`` or the bundled file)."""

    try:
        env = EnvSettings()
    except ValidationError as exc:
        raise RuntimeError(f"Invalid ASECLUSTER_* environment: {exc}") from exc

    path = config_path or env.config
    if path is not None and not path.exists():
        raise FileNotFoundError(f"Missing configuration file: {path}")
    path = path or DEFAULT_CONFIG_DIR / "harness.toml"
    data = _load_toml(path) if path.exists() else {}
    try:
        return Settings(env=env, **data)
    except ValidationError as exc:
        raise RuntimeError(f"Invalid {path.name} configuration: {exc}") from exc


def configure_logging(runs_dir: Path, config_path: Optional[Path] = None) -> None:
    path = config_path or DEFAULT_CONFIG_DIR / "logging.toml"
    if not path.exists():
        logging.basicConfig(level=logging.INFO)
        return

    config_data = _load_toml(path)

    def _inject_runs_dir(obj: Any) -> Any:
        if isinstance(obj, dict):
            return {key: _inject_runs_dir(value) for key, value in obj.items()}
        if isinstance(obj, list):
            return [_inject_runs_dir(item) for item in obj]
        if isinstance(obj, str):
            return obj.replace("${runs_dir}", str(runs_dir))
        return obj

    (runs_dir / "logs").mkdir(parents=True, exist_ok=True)
    logging.config.dictConfig(_inject_runs_dir(config_data))  # type: ignore[arg-type]


__all__ = [
    "ClusteringConfig",
    "EnvSettings",
    "HarnessConfig",
    "OutputConfig",
    "Settings",
    "SpectralConfig",
    "configure_logging",
    "load_settings",
]
