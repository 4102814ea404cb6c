"""Seeded Monte-Carlo trials, sweeps over n and the clustering-objective consistency experiment."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from .bounds import BOUND_NAMES, beta, beta_terms, bound_report, model_constants
from .clustering import DEFAULT_RESTARTS, misclustering_count, mse_cluster, phi_objective
from .errors import NumericalError, PreconditionError
from .graph_models import (
    LatentDistribution,
    block_spec_from_config,
    sample_adjacency,
    sample_iid_latent,
    sbm_to_latent,
)
from .schemas import ConsistencySummaryRow, ModelConfig, NSummary, SlopeFit, SweepSummary
from .spectral import DENSE_MAX_N, align, ase, project_sphere

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.05
DEFAULT_N_GRID: Tuple[int, ...] = (250, 500, 1000, 2000, 4000)
DEFAULT_TRIALS = 50
CERTIFICATE_SLACK = 1e-12

# Column order of the per-trial records CSV.
RECORD_COLUMNS: Tuple[str, ...] = (
    "model_id",
    "n",
    "trial",
    "seed",
    "degenerate",
    "degenerate_reason",
    "err_2inf",
    "err_F",
    "miscluster_count",
    "sse",
    "cluster_residual_F",
    "truth_residual_F",
    "certificate",
    "beta",
    "beta_hypothesis_violated",
    "beta_projection",
    "beta_eigenvalue",
    "beta_noise",
) + tuple(f"{name}_{side}" for name in BOUND_NAMES for side in ("lhs", "rhs"))

CONSISTENCY_COLUMNS: Tuple[str, ...] = (
    "n",
    "trial",
    "seed",
    "degenerate",
    "phi_true",
    "phi_embedded",
    "gap",
)


@dataclass(frozen=True, slots=True)
class TrialSettings:
    eta: float = DEFAULT_ETA
    restarts: int = DEFAULT_RESTARTS
    d: Optional[int] = None
    solver: Literal["auto", "dense", "lanczos"] = "auto"
    dense_max_n: int = DENSE_MAX_N
    cluster_workers: int = 1


@dataclass(slots=True)
class TrialRecord:
    """Measurements from one seeded pass through sample → embed → cluster → bounds."""

    model_id: str
    n: int
    trial: int
    seed: int
    degenerate: bool = False
    degenerate_reason: str = ""
    err_2inf: float = math.nan
    err_F: float = math.nan
    miscluster_count: Optional[int] = None
    sse: float = math.nan
    cluster_residual_F: float = math.nan
    truth_residual_F: float = math.nan
    certificate: Optional[bool] = None
    beta: float = math.nan
    beta_hypothesis_violated: bool = False
    beta_projection: float = math.nan
    beta_eigenvalue: float = math.nan
    beta_noise: float = math.nan
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    labels: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    def bound_holds(self, name: str) -> Optional[bool]:
        if name not in self.bounds:
            return None
        lhs, rhs = self.bounds[name]
        return bool(lhs <= rhs)

    def to_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {
            "model_id": self.model_id,
            "n": self.n,
            "trial": self.trial,
            "seed": self.seed,
            "degenerate": self.degenerate,
            "degenerate_reason": self.degenerate_reason,
            "err_2inf": self.err_2inf,
            "err_F": self.err_F,
            "miscluster_count": self.miscluster_count,
            "sse": self.sse,
            "cluster_residual_F": self.cluster_residual_F,
            "truth_residual_F": self.truth_residual_F,
            "certificate": self.certificate,
            "beta": self.beta,
            "beta_hypothesis_violated": self.beta_hypothesis_violated,
            "beta_projection": self.beta_projection,
            "beta_eigenvalue": self.beta_eigenvalue,
            "beta_noise": self.beta_noise,
        }
        for name in BOUND_NAMES:
            lhs, rhs = self.bounds.get(name, (math.nan, math.nan))
            row[f"{name}_lhs"] = lhs
            row[f"{name}_rhs"] = rhs
        return row


@dataclass(slots=True)
class SweepResult:
    summary: SweepSummary
    records: List[TrialRecord]


@dataclass(frozen=True, slots=True)
class ConsistencyRecord:
    n: int
    trial: int
    seed: int
    degenerate: bool
    phi_true: float
    phi_embedded: float

    @property
    def gap(self) -> float:
        return abs(self.phi_embedded - self.phi_true)

    def to_row(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "trial": self.trial,
            "seed": self.seed,
            "degenerate": self.degenerate,
            "phi_true": self.phi_true,
            "phi_embedded": self.phi_embedded,
            "gap": self.gap,
        }


@dataclass(slots=True)
class ConsistencyResult:
    records: List[ConsistencyRecord]
    summary: List[ConsistencySummaryRow]

    def gaps(self, n: int) -> Dict[int, float]:
        return {r.trial: r.gap for r in self.records if r.n == n and not r.degenerate}


def _state(sequence: np.random.SeedSequence) -> int:
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def derive_seed(base_seed: int, *key: int) -> int:
    """Seed for a (base_seed, key...) cell; adding cells never shifts existing ones."""

    return _state(np.random.SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key)))


def trial_streams(seed: int) -> Tuple[int, int, int]:
    """(model, graph, cluster) seeds used by one trial."""

    model, graph, cluster = np.random.SeedSequence(seed).spawn(3)
    return _state(model), _state(graph), _state(cluster)


def run_trial(
    config: ModelConfig,
    n: int,
    seed: int,
    settings: Optional[TrialSettings] = None,
    *,
    trial: int = 0,
    noiseless: bool = False,
) -> TrialRecord:
    """One full pipeline run; numerical degeneracy is recorded, never raised."""

    settings = settings or TrialSettings()
    model_seed, graph_seed, cluster_seed = trial_streams(seed)
    record = TrialRecord(model_id=config.id, n=n, trial=trial, seed=seed)
    timings = record.timings

    started = time.perf_counter()
    spec = block_spec_from_config(config, n, seed=model_seed)
    X = sbm_to_latent(spec, d=settings.d)
    constants = model_constants(X, spec.tau, degree_corrected=spec.is_degree_corrected)
    estimate = beta(X.d, X.n, settings.eta, constants.Delta, constants.gamma)
    record.beta = estimate.value
    record.beta_hypothesis_violated = estimate.hypothesis_violated
    terms = beta_terms(X.d, X.n, settings.eta, constants.Delta, constants.gamma)
    record.beta_projection = terms["projection"]
    record.beta_eigenvalue = terms["eigenvalue"]
    record.beta_noise = terms["noise"]
    timings["model"] = time.perf_counter() - started

    started = time.perf_counter()
    A = X.probabilities() if noiseless else sample_adjacency(X, graph_seed)
    timings["sample"] = time.perf_counter() - started

    try:
        started = time.perf_counter()
        embedding = ase(
            A,
            X.d,
            method=settings.solver,
            dense_max_n=settings.dense_max_n,
            seed=0 if noiseless else graph_seed,
        )
        timings["embed"] = time.perf_counter() - started

        alignment = align(embedding.Xhat, X.rows)
        record.err_2inf = alignment.residual_2inf
        record.err_F = alignment.residual_F
        truth = X.rows @ alignment.W
        points = embedding.Xhat
        if spec.is_degree_corrected:
            points = project_sphere(points)
            truth = project_sphere(truth)

        started = time.perf_counter()
        clustering = mse_cluster(
            points, spec.K, settings.restarts, seed=cluster_seed, workers=settings.cluster_workers
        )
        timings["cluster"] = time.perf_counter() - started

        started = time.perf_counter()
        report = bound_report(
            A,
            X,
            embedding,
            settings.eta,
            tau=spec.tau,
            degree_corrected=spec.is_degree_corrected,
            constants=constants,
        )
        timings["bounds"] = time.perf_counter() - started
    except NumericalError as exc:
        record.degenerate = True
        record.degenerate_reason = type(exc).__name__
        logger.warning("degenerate trial model=%s n=%d seed=%d: %s", config.id, n, seed, exc)
        return record

    record.labels = clustering.labels
    record.miscluster_count = misclustering_count(spec.tau, clustering.labels, spec.K).count
    record.sse = clustering.sse
    record.cluster_residual_F = math.sqrt(clustering.sse)
    record.truth_residual_F = float(np.linalg.norm(truth - points))
    record.certificate = record.cluster_residual_F <= record.truth_residual_F + CERTIFICATE_SLACK * max(
        1.0, record.truth_residual_F
    )
    record.bounds = {entry.name: (entry.lhs, entry.rhs) for entry in report.entries}
    return record


TrialFn = Callable[..., TrialRecord]


def _check_grid(n_grid: Sequence[int]) -> List[int]:
    grid = [int(n) for n in n_grid]
    if not grid:
        raise PreconditionError("n_grid must not be empty")
    for previous, current in zip(grid, grid[1:]):
        if current <= previous:
            raise PreconditionError(f"n_grid must be strictly ascending (got {previous} before {current})")
    return grid


def _map(fn: Callable, items: Sequence, parallelism: int, progress: bool, desc: str) -> List:
    if parallelism <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=not progress)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(tqdm(pool.map(fn, items), total=len(items), desc=desc, disable=not progress))


def records_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([record.to_row() for record in records], columns=list(RECORD_COLUMNS))
    return frame.astype({"miscluster_count": "Int64", "certificate": "boolean"})


def fit_slope(n_values: Sequence[float], errors: Sequence[float]) -> Optional[SlopeFit]:
    """Least-squares line through (log n, log error) with a 95% CI on the slope."""

    pairs = [(n, e) for n, e in zip(n_values, errors) if e > 0 and math.isfinite(e)]
    if len(pairs) < 2:
        return None
    x = np.log([n for n, _ in pairs])
    y = np.log([e for _, e in pairs])
    result = stats.linregress(x, y)
    stderr = float(result.stderr) if len(pairs) > 2 else 0.0
    half_width = float(stats.t.ppf(0.975, len(pairs) - 2)) * stderr if len(pairs) > 2 else 0.0
    return SlopeFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        stderr=stderr,
        ci_low=float(result.slope) - half_width,
        ci_high=float(result.slope) + half_width,
        points=len(pairs),
    )


def summarize(
    records: Sequence[TrialRecord],
    model_id: str,
    n_grid: Sequence[int],
    trials_per_n: int,
    base_seed: int,
) -> SweepSummary:
    """Per-n aggregates over sorted records; degenerate trials only enter the degenerate count."""

    frame = records_frame(sorted(records, key=lambda r: (r.n, r.trial)))
    per_n: List[NSummary] = []
    for n in n_grid:
        group = frame[frame["n"] == n]
        healthy = group[~group["degenerate"]]
        count = len(healthy)
        errors = healthy["err_2inf"].to_numpy(dtype=float)
        hold_rates: Dict[str, float] = {}
        for name in BOUND_NAMES:
            lhs = healthy[f"{name}_lhs"].to_numpy(dtype=float)
            rhs = healthy[f"{name}_rhs"].to_numpy(dtype=float)
            present = ~np.isnan(lhs)
            if present.any():
                hold_rates[name] = float(np.mean(lhs[present] <= rhs[present]))
        per_n.append(
            NSummary(
                n=int(n),
                trials=len(group),
                degenerate=int(group["degenerate"].sum()),
                mean_err_2inf=float(errors.mean()) if count else math.nan,
                stderr_err_2inf=float(errors.std(ddof=1) / math.sqrt(count)) if count > 1 else 0.0,
                perfect_clustering_rate=float((healthy["miscluster_count"] == 0).mean()) if count else 0.0,
                certificate_rate=float(healthy["certificate"].astype(bool).mean()) if count else 0.0,
                beta=float(group["beta"].mean()),
                bound_hold_rates=hold_rates,
            )
        )
    fit = fit_slope([item.n for item in per_n], [item.mean_err_2inf for item in per_n])
    return SweepSummary(
        model_id=model_id,
        n_grid=[int(n) for n in n_grid],
        trials_per_n=trials_per_n,
        base_seed=base_seed,
        per_n=per_n,
        fit=fit,
    )


def sweep(
    config: ModelConfig,
    n_grid: Sequence[int],
    trials_per_n: int,
    base_seed: int,
    parallelism: int = 1,
    *,
    settings: Optional[TrialSettings] = None,
    trial_fn: Optional[TrialFn] = None,
    progress: bool = False,
) -> SweepResult:
    """trials_per_n records per n with seeds derive_seed(base_seed, n, trial); order-independent."""

    grid = _check_grid(n_grid)
    if trials_per_n < 1:
        raise PreconditionError(f"trials_per_n must be at least 1 (got {trials_per_n})")
    settings = settings or TrialSettings()
    fn = trial_fn or run_trial
    tasks = [(n, t) for n in grid for t in range(trials_per_n)]

    def _task(task: Tuple[int, int]) -> TrialRecord:
        n, t = task
        return fn(config, n, derive_seed(base_seed, n, t), settings, trial=t)

    logger.info(
        "sweep model=%s grid=%s trials=%d base_seed=%d parallelism=%d",
        config.id,
        grid,
        trials_per_n,
        base_seed,
        parallelism,
    )
    records = sorted(_map(_task, tasks, parallelism, progress, "trials"), key=lambda r: (r.n, r.trial))
    summary = summarize(records, config.id, grid, trials_per_n, base_seed)
    degenerate = sum(r.degenerate for r in records)
    if degenerate:
        logger.warning("sweep model=%s: %d of %d trials degenerate", config.id, degenerate, len(records))
    return SweepResult(summary=summary, records=records)


def consistency_experiment(
    dist: LatentDistribution,
    n_grid: Sequence[int],
    K: int,
    trials: int,
    seed: int,
    *,
    restarts: int = DEFAULT_RESTARTS,
    phi: Union[str, Tuple[str, float]] = "square",
    parallelism: int = 1,
    progress: bool = False,
) -> ConsistencyResult:
    """Φ at the K-means optimum of the true positions versus the embedded ones, per n.

    Trial t at every n uses seed derive_seed(seed, t, n), so gaps pair up by t.
    """

    grid = _check_grid(n_grid)
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1 (got {trials})")

    def _task(task: Tuple[int, int]) -> ConsistencyRecord:
        t, n = task
        trial_seed = derive_seed(seed, t, n)
        latent_seed, graph_seed, cluster_seed = trial_streams(trial_seed)
        X = sample_iid_latent(dist, n, latent_seed)
        truth = mse_cluster(X.rows, K, restarts, seed=cluster_seed)
        phi_true = phi_objective(X.rows, truth.centroids, phi)
        try:
            embedding = ase(sample_adjacency(X, graph_seed), dist.d, seed=graph_seed)
        except NumericalError as exc:
            logger.warning("degenerate consistency trial n=%d t=%d: %s", n, t, exc)
            return ConsistencyRecord(n, t, trial_seed, True, phi_true, math.nan)
        fitted = mse_cluster(embedding.Xhat, K, restarts, seed=cluster_seed)
        phi_embedded = phi_objective(embedding.Xhat, fitted.centroids, phi)
        return ConsistencyRecord(n, t, trial_seed, False, phi_true, phi_embedded)

    tasks = [(t, n) for t in range(trials) for n in grid]
    records = sorted(_map(_task, tasks, parallelism, progress, "consistency"), key=lambda r: (r.n, r.trial))

    summary: List[ConsistencySummaryRow] = []
    for n in grid:
        rows = [r for r in records if r.n == n]
        healthy = [r for r in rows if not r.degenerate]
        summary.append(
            ConsistencySummaryRow(
                n=n,
                trials=len(rows),
                degenerate=len(rows) - len(healthy),
                mean_phi_true=float(np.mean([r.phi_true for r in rows])),
                mean_phi_embedded=float(np.mean([r.phi_embedded for r in healthy])) if healthy else math.nan,
                mean_gap=float(np.mean([r.gap for r in healthy])) if healthy else math.nan,
            )
        )
    return ConsistencyResult(records=records, summary=summary)


__all__ = [
    "CONSISTENCY_COLUMNS",
    "ConsistencyRecord",
    "ConsistencyResult",
    "DEFAULT_ETA",
    "DEFAULT_N_GRID",
    "RECORD_COLUMNS",
    "SweepResult",
    "TrialRecord",
    "TrialSettings",
    "consistency_experiment",
    "derive_seed",
    "fit_slope",
    "records_frame",
    "run_trial",
    "summarize",
    "sweep",
    "trial_streams",
]
