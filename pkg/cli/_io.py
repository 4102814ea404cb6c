"""Helpers for persisting run artifacts: edge lists, CSV tables, JSON reports and the event log."""

from __future__ import annotations

import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union
from uuid import uuid4

import numpy as np
import orjson
import pandas as pd
from pydantic import BaseModel

from core.errors import PreconditionError
from core.graph_models import AdjacencySample

try:
    import fcntl  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - Windows fallback
    fcntl = None  # type: ignore

FLOAT_FORMAT = "%.17g"
_HEADER_RE = re.compile(r"^#\s*n=(?P<n>\d+)(?:\s+seed=(?P<seed>\d+|None))?\s*$")
_JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def _locked_write(handle, data: bytes) -> None:
    if fcntl is not None:
        fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
    handle.write(data)
    handle.flush()
    if fcntl is not None:
        fcntl.flock(handle.fileno(), fcntl.LOCK_UN)


def append_jsonl(path: Path, payload: Dict[str, Any]) -> None:
    """Append a JSON line to the target file."""

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("ab") as handle:
        _locked_write(handle, orjson.dumps(payload, default=str, option=orjson.OPT_SERIALIZE_NUMPY) + b"\n")


def new_run_dir(runs_dir: Path) -> Path:
    """Return a new timestamped directory under ``runs_dir/runs`` and point ``latest`` at it."""

    root = runs_dir / "runs"
    root.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    candidate = root / timestamp
    if candidate.exists():
        candidate = root / f"{timestamp}-{uuid4().hex[:8]}"
    candidate.mkdir(parents=True, exist_ok=False)

    latest_link = root / "latest"
    if latest_link.exists() or latest_link.is_symlink():
        latest_link.unlink()
    try:
        latest_link.symlink_to(candidate, target_is_directory=True)
    except OSError:  # pragma: no cover - filesystems without symlink support
        pass

    return candidate


def write_json(path: Path, payload: Union[BaseModel, Dict[str, Any]]) -> None:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="python")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(payload, option=_JSON_OPTIONS) + b"\n")


def read_json(path: Path) -> Any:
    return orjson.loads(path.read_bytes())


def write_csv(path: Path, frame: pd.DataFrame, float_format: str = FLOAT_FORMAT) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")


# --- edge lists ---------------------------------------------------------------------


def write_edge_list(path: Path, sample: AdjacencySample, *, seed: Optional[int] = None) -> None:
    """Upper-triangular "i j" pairs, 0-indexed, under a "# n=<n> seed=<seed>" header.

    ``seed`` overrides the sample seed in the header (the CLI records the trial seed).
    """

    edges = sample.edge_array()
    header_seed = sample.seed if seed is None else seed
    lines = [f"# n={sample.n} seed={header_seed}"]
    lines.extend(f"{int(i)} {int(j)}" for i, j in edges)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edge_list(path: Path, *, one_indexed: bool = False, n: Optional[int] = None) -> AdjacencySample:
    """Parse an edge list; comment lines start with '#', and the header supplies n and seed."""

    if not path.exists():
        raise FileNotFoundError(f"edge list not found: {path}")
    header_n: Optional[int] = None
    seed: Optional[int] = None
    pairs = []
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _HEADER_RE.match(line)
            if match and header_n is None:
                header_n = int(match.group("n"))
                if match.group("seed") not in (None, "None"):
                    seed = int(match.group("seed"))
            continue
        fields = line.split()
        if len(fields) < 2:
            raise PreconditionError(f"{path}:{number}: expected 'i j' (got {raw!r})")
        try:
            pairs.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise PreconditionError(f"{path}:{number}: vertex ids must be integers (got {raw!r})") from None

    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if one_indexed:
        edges = edges - 1
    size = n or header_n
    if size is None:
        size = int(edges.max()) + 1 if edges.size else 0
    if size < 1:
        raise PreconditionError(f"{path}: cannot determine the vertex count n")
    return AdjacencySample.from_edges(size, edges, seed=seed)


# --- embeddings and labels ------------------------------------------------------------


def write_embedding(path: Path, Xhat: np.ndarray, eigenvalues: np.ndarray, float_format: str = FLOAT_FORMAT) -> Path:
    """Write ``vertex,x1..xd,eigval_rank`` to ``path`` and ``rank,value`` to a sibling ``*.eigenvalues.csv``.

    ``eigval_rank`` is the 1-based rank of the retained eigenvalue whose
    coordinate dominates the vertex's row.
    """

    d = Xhat.shape[1]
    frame = pd.DataFrame(Xhat, columns=[f"x{k}" for k in range(1, d + 1)])
    frame.insert(0, "vertex", np.arange(Xhat.shape[0]))
    frame["eigval_rank"] = np.argmax(np.abs(Xhat), axis=1) + 1
    write_csv(path, frame, float_format)
    eigen_path = eigenvalue_path(path)
    write_csv(eigen_path, pd.DataFrame({"rank": np.arange(1, d + 1), "value": eigenvalues}), float_format)
    return eigen_path


def eigenvalue_path(embedding_path: Path) -> Path:
    return embedding_path.with_name(f"{embedding_path.stem}.eigenvalues.csv")


def read_embedding(path: Path) -> np.ndarray:
    if not path.exists():
        raise FileNotFoundError(f"embedding not found: {path}")
    frame = pd.read_csv(path)
    columns = [c for c in frame.columns if re.fullmatch(r"x\d+", str(c))]
    if not columns:
        raise PreconditionError(f"{path}: expected columns vertex,x1,...,xd (got {list(frame.columns)})")
    frame = frame.sort_values("vertex") if "vertex" in frame.columns else frame
    return frame[columns].to_numpy(dtype=float)


def write_labels(path: Path, labels_hat: Sequence[int], labels_true: Optional[Sequence[int]] = None) -> None:
    frame = pd.DataFrame(
        {
            "vertex": np.arange(len(labels_hat)),
            "label_true": pd.array(labels_true if labels_true is not None else [None] * len(labels_hat), dtype="Int64"),
            "label_hat": np.asarray(labels_hat, dtype=np.int64),
        }
    )
    write_csv(path, frame)


def write_truth(path: Path, tau: Sequence[int]) -> None:
    write_csv(path, pd.DataFrame({"vertex": np.arange(len(tau)), "label": np.asarray(tau, dtype=np.int64)}))


def read_truth(path: Path) -> np.ndarray:
    """Ground-truth labels from a ``vertex,label`` file or a ``label_true`` column."""

    if not path.exists():
        raise FileNotFoundError(f"truth labels not found: {path}")
    frame = pd.read_csv(path)
    for column in ("label", "label_true"):
        if column in frame.columns:
            if frame[column].isna().any():
                raise PreconditionError(f"{path}: column '{column}' has missing labels")
            if "vertex" in frame.columns:
                frame = frame.sort_values("vertex")
            return frame[column].to_numpy(dtype=np.int64)
    raise PreconditionError(f"{path}: expected a 'label' or 'label_true' column (got {list(frame.columns)})")


def read_labels(path: Path) -> np.ndarray:
    """Estimated labels (``label_hat``) when present, otherwise the ground-truth column."""

    if path.exists():
        frame = pd.read_csv(path)
        if "label_hat" in frame.columns:
            if "vertex" in frame.columns:
                frame = frame.sort_values("vertex")
            return frame["label_hat"].to_numpy(dtype=np.int64)
    return read_truth(path)


__all__ = [
    "FLOAT_FORMAT",
    "append_jsonl",
    "eigenvalue_path",
    "new_run_dir",
    "read_edge_list",
    "read_embedding",
    "read_json",
    "read_labels",
    "read_truth",
    "write_csv",
    "write_edge_list",
    "write_embedding",
    "write_json",
    "write_labels",
    "write_truth",
]
