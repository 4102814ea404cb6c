"""SVG charts for sweep records and embeddings."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from core.harness import fit_slope

logger = logging.getLogger(__name__)

# Fixed ids and no date stamp keep repeated renders byte-identical.
matplotlib.rcParams["svg.hashsalt"] = "ase-cluster"
_SVG_METADATA = {"Date": None}


def _save(figure: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format="svg", metadata=_SVG_METADATA, bbox_inches="tight")
    logger.info("wrote %s", path)
    return path


def error_decay_table(records: pd.DataFrame, column: str = "err_2inf") -> pd.DataFrame:
    """Mean and standard error of ``column`` per n over non-degenerate trials."""

    if column not in records.columns or "n" not in records.columns:
        raise KeyError(f"records need columns 'n' and '{column}' (got {list(records.columns)})")
    healthy = records
    if "degenerate" in records.columns:
        healthy = records[~records["degenerate"].astype(bool)]
    grouped = healthy.groupby("n")[column]
    table = pd.DataFrame({"mean": grouped.mean(), "count": grouped.count(), "std": grouped.std(ddof=1)})
    table["stderr"] = (table["std"] / np.sqrt(table["count"])).fillna(0.0)
    return table.reset_index().sort_values("n")


def plot_error_decay(records: pd.DataFrame, path: Path, *, column: str = "err_2inf", title: Optional[str] = None) -> Path:
    """Log-log mean error against n with standard-error bars and an n^(-1/2) guide."""

    table = error_decay_table(records, column)
    n = table["n"].to_numpy(dtype=float)
    mean = table["mean"].to_numpy(dtype=float)

    figure = Figure(figsize=(6.0, 4.5))
    axes = figure.add_subplot()
    axes.errorbar(n, mean, yerr=table["stderr"].to_numpy(dtype=float), fmt="o-", capsize=3, label="mean error")
    finite = np.isfinite(mean) & (mean > 0)
    if finite.any():
        anchor_n, anchor = n[finite][0], mean[finite][0]
        axes.plot(n, anchor * np.sqrt(anchor_n / n), "--", color="grey", label="n^(-1/2)")
    fit = fit_slope(n, mean)
    if fit is not None:
        axes.text(
            0.02,
            0.04,
            f"slope {fit.slope:.3f} [{fit.ci_low:.3f}, {fit.ci_high:.3f}]",
            transform=axes.transAxes,
        )
    axes.set_xscale("log")
    axes.set_yscale("log")
    axes.set_xlabel("n")
    axes.set_ylabel(column)
    if title:
        axes.set_title(title)
    axes.legend(loc="upper right")
    return _save(figure, path)


def _scatter(axes, points: np.ndarray, labels: Optional[Sequence[int]], title: str) -> None:
    if points.shape[1] < 2:
        points = np.column_stack([points[:, 0], np.zeros(points.shape[0])])
    if labels is None:
        axes.scatter(points[:, 0], points[:, 1], s=4, label="vertices", gid="group-0")
    else:
        labels = np.asarray(labels)
        for k in np.unique(labels):
            mask = labels == k
            axes.scatter(points[mask, 0], points[mask, 1], s=4, label=f"block {int(k)}", gid=f"group-{int(k)}")
    axes.set_title(title)
    axes.set_aspect("equal", adjustable="datalim")
    axes.legend(loc="best")


def plot_embedding(
    Xhat: np.ndarray,
    path: Path,
    *,
    labels: Optional[Sequence[int]] = None,
    projected: Optional[np.ndarray] = None,
) -> Path:
    """Scatter of the first two embedding coordinates, beside the sphere projection when given."""

    panels = 1 if projected is None else 2
    figure = Figure(figsize=(5.0 * panels, 4.5))
    _scatter(figure.add_subplot(1, panels, 1), np.asarray(Xhat, dtype=float), labels, "Xhat")
    if projected is not None:
        axes = figure.add_subplot(1, panels, 2)
        theta = np.linspace(0.0, math.pi / 2, 200)
        axes.plot(np.cos(theta), np.sin(theta), color="lightgrey", linewidth=0.8)
        _scatter(axes, np.asarray(projected, dtype=float), labels, "Yhat")
    return _save(figure, path)


__all__ = ["error_decay_table", "plot_embedding", "plot_error_decay"]
