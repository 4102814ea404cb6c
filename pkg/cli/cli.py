"""Typer-based CLI for sampling, embedding, clustering and the Monte-Carlo harness."""

from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import click
import pandas as pd
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from core.bounds import check_assumptions, sparse_regime
from core.clustering import misclustering_count, mse_cluster
from core.errors import ModelValidationError, NumericalError, PreconditionError
from core.graph_models import block_spec_from_config, sample_adjacency, sbm_to_latent
from core.harness import (
    CONSISTENCY_COLUMNS,
    consistency_experiment,
    records_frame,
    sweep as run_sweep,
    trial_streams,
)
from core.presets import build_distribution, resolve_distribution, resolve_model
from core.spectral import ase, project_sphere

from ._io import (
    append_jsonl,
    new_run_dir,
    read_edge_list,
    read_embedding,
    read_labels,
    read_truth,
    write_csv,
    write_edge_list,
    write_embedding,
    write_json,
    write_labels,
    write_truth,
)
from .config import Settings, configure_logging, load_settings
from .plotting import plot_embedding, plot_error_decay

app = typer.Typer(help="Adjacency spectral embedding and mean-square-error clustering for blockmodel graphs.")

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


@dataclass
class CLIState:
    """Runtime information shared across commands."""

    runs_dir: Path
    settings: Settings


@dataclass
class _Outcome:
    outputs: Dict[str, str] = field(default_factory=dict)

    def wrote(self, name: str, path: Path) -> None:
        self.outputs[name] = str(path)


@app.callback()
def main(
    ctx: typer.Context,
    runs_dir: Optional[Path] = typer.Option(
        None,
        "--runs-dir",
        help="Directory for run folders, logs and events.jsonl (default: ASECLUSTER_RUNS_DIR).",
    ),
    config: Optional[Path] = typer.Option(
        None,
        "--config",
        help="Harness TOML overriding config/harness.toml (default: ASECLUSTER_CONFIG).",
    ),
) -> None:
    """Initialise settings, logging, and the runs directory."""

    try:
        settings = load_settings(config)
    except (FileNotFoundError, RuntimeError, ValueError) as exc:
        typer.secho(f"Configuration error: {exc}", err=True, fg=typer.colors.RED)
        raise typer.Exit(code=EXIT_VALIDATION) from exc
    root = (runs_dir or settings.env.runs_dir).expanduser().resolve()
    root.mkdir(parents=True, exist_ok=True)
    try:
        configure_logging(root, settings.logging_config)
    except Exception as exc:  # pragma: no cover - logging must never block a run
        typer.secho(f"Failed to configure logging: {exc}", err=True, fg=typer.colors.YELLOW)

    ctx.obj = CLIState(runs_dir=root, settings=settings)


def _state(ctx: typer.Context) -> CLIState:
    state = ctx.obj
    if not isinstance(state, CLIState):  # pragma: no cover - callback always runs first
        raise RuntimeError("CLI state missing; invoke through the ase-cluster app")
    return state


def _event(state: CLIState, command: str, parameters: Dict[str, Any], outcome: str, **extra: Any) -> None:
    payload = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "parameters": {key: (str(value) if isinstance(value, Path) else value) for key, value in parameters.items()},
        "outcome": outcome,
    }
    payload.update(extra)
    append_jsonl(state.runs_dir / "events.jsonl", payload)


@contextmanager
def _guard(state: CLIState, command: str, parameters: Dict[str, Any]) -> Iterator[_Outcome]:
    """Map library errors to exit codes and record the outcome in events.jsonl."""

    outcome = _Outcome()
    try:
        yield outcome
    except NumericalError as exc:
        typer.secho(f"{command}: degenerate numerical outcome: {exc}", err=True, fg=typer.colors.RED)
        _event(state, command, parameters, "degenerate", error=str(exc), exit_code=EXIT_NUMERICAL)
        raise typer.Exit(code=EXIT_NUMERICAL) from exc
    except (PreconditionError, ModelValidationError, ValidationError, FileNotFoundError) as exc:
        typer.secho(f"{command}: {exc}", err=True, fg=typer.colors.RED)
        _event(state, command, parameters, "invalid", error=str(exc), exit_code=EXIT_VALIDATION)
        raise typer.Exit(code=EXIT_VALIDATION) from exc
    _event(state, command, parameters, "ok", outputs=outcome.outputs, exit_code=0)


def _int_grid(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise PreconditionError(f"--n must be comma-separated integers (got '{value}')") from None


def _float_grid(value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise PreconditionError(f"--n must be comma-separated numbers (got '{value}')") from None


def _verdict(flag: Optional[bool]) -> str:
    if flag is None:
        return "n/a"
    return "[green]PASS[/green]" if flag else "[red]FAIL[/red]"


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


@app.command(help="Sample a graph from a model and write it as an edge list.")
def sample(
    ctx: typer.Context,
    model: str = typer.Option(..., "--model", help="Preset name or path to a model JSON."),
    n: Optional[int] = typer.Option(None, "--n", min=1, help="Vertex count (required for block-fraction models)."),
    seed: int = typer.Option(0, "--seed", min=0, help="Trial seed; model, graph and cluster streams derive from it."),
    out: Optional[Path] = typer.Option(None, "--out", help="Edge list path (default: a new run folder)."),
) -> None:
    state = _state(ctx)
    parameters = {"model": model, "n": n, "seed": seed, "out": out}
    with _guard(state, "sample", parameters) as outcome:
        config = resolve_model(model)
        model_seed, graph_seed, _ = trial_streams(seed)
        spec = block_spec_from_config(config, n, seed=model_seed)
        X = sbm_to_latent(spec)
        A = sample_adjacency(X, graph_seed)

        path = out or new_run_dir(state.runs_dir) / "graph.edges"
        write_edge_list(path, A, seed=seed)
        truth_path = path.with_name(f"{path.stem}.truth.csv")
        write_truth(truth_path, spec.tau)
        outcome.wrote("edges", path)
        outcome.wrote("truth", truth_path)
        logger.info("sample model=%s n=%d edges=%d -> %s", config.id, A.n, A.num_edges, path)
        typer.echo(f"Wrote {A.num_edges} edges on n={A.n} vertices to {path} (truth labels: {truth_path})")


@app.command(help="Embed an edge list with the adjacency spectral embedding.")
def embed(
    ctx: typer.Context,
    edges: Path = typer.Argument(..., help="Edge list with an optional '# n=<n> seed=<seed>' header."),
    d: int = typer.Option(..., "--d", min=1, help="Embedding dimension."),
    out: Optional[Path] = typer.Option(None, "--out", help="Embedding CSV (default: next to the edge list)."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Trial seed (default: the header seed)."),
    one_indexed: bool = typer.Option(False, "--one-indexed", help="Vertex ids in the file start at 1."),
    n: Optional[int] = typer.Option(None, "--n", min=1, help="Vertex count when the file has no header."),
    plot: bool = typer.Option(False, "--plot", help="Also write an SVG scatter of the embedding."),
) -> None:
    state = _state(ctx)
    parameters = {"edges": edges, "d": d, "out": out, "seed": seed, "one_indexed": one_indexed, "n": n}
    with _guard(state, "embed", parameters) as outcome:
        A = read_edge_list(edges, one_indexed=one_indexed, n=n)
        trial_seed = seed if seed is not None else A.seed
        lanczos_seed = 0 if trial_seed is None else trial_streams(trial_seed)[1]
        spectral = state.settings.spectral
        embedding = ase(A, d, method=spectral.solver, dense_max_n=spectral.dense_max_n, seed=lanczos_seed)

        path = out or edges.with_name(f"{edges.stem}.embedding.csv")
        eigen_path = write_embedding(path, embedding.Xhat, embedding.eigenvalues, state.settings.output.float_format)
        outcome.wrote("embedding", path)
        outcome.wrote("eigenvalues", eigen_path)
        if plot or state.settings.output.plot:
            outcome.wrote("plot", plot_embedding(embedding.Xhat, path.with_suffix(".svg")))
        typer.echo(f"Wrote {embedding.n}x{embedding.d} embedding to {path} (eigenvalues: {eigen_path})")


@app.command(help="Cluster an embedding by minimising the mean squared error (K-means).")
def cluster(
    ctx: typer.Context,
    embedding: Path = typer.Argument(..., help="Embedding CSV with columns vertex,x1,...,xd."),
    k: int = typer.Option(..., "--k", min=1, help="Number of clusters."),
    restarts: Optional[int] = typer.Option(None, "--restarts", min=1, help="k-means++ restarts."),
    seed: int = typer.Option(0, "--seed", min=0, help="Trial seed; the cluster stream derives from it."),
    truth: Optional[Path] = typer.Option(None, "--truth", help="Ground-truth labels CSV for a misclustering report."),
    sphere: bool = typer.Option(False, "--sphere", help="Project rows onto the unit sphere first (degree-corrected models)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Labels CSV (default: next to the embedding)."),
) -> None:
    state = _state(ctx)
    parameters = {"embedding": embedding, "k": k, "restarts": restarts, "seed": seed, "truth": truth, "sphere": sphere}
    with _guard(state, "cluster", parameters) as outcome:
        points = read_embedding(embedding)
        if sphere:
            points = project_sphere(points)
        settings = state.settings.clustering
        result = mse_cluster(
            points,
            k,
            restarts or settings.restarts,
            seed=trial_streams(seed)[2],
            workers=settings.workers,
        )
        tau = read_truth(truth) if truth is not None else None
        if tau is not None and tau.size != result.labels.size:
            raise PreconditionError(
                f"truth labels must cover every vertex (got {tau.size} labels for {result.labels.size} vertices)"
            )

        path = out or embedding.with_name(f"{embedding.stem}.labels.csv")
        write_labels(path, result.labels, tau)
        outcome.wrote("labels", path)
        message = f"K={k} sse={result.sse:.6g} converged={result.converged} ties={result.ties}; labels in {path}"
        if tau is not None:
            report = misclustering_count(tau, result.labels, k)
            report_path = path.with_name(f"{path.stem}.miscluster.json")
            write_json(report_path, report)
            outcome.wrote("miscluster", report_path)
            message += f"; misclustered {report.count} of {tau.size}"
        typer.echo(message)


@app.command(help="Evaluate the perfect-clustering assumptions for a model at size n.")
def check(
    ctx: typer.Context,
    model: str = typer.Option(..., "--model", help="Preset name or path to a model JSON."),
    n: Optional[int] = typer.Option(None, "--n", min=1, help="Vertex count."),
    eta: Optional[float] = typer.Option(None, "--eta", help="Failure probability in (0, 1/2)."),
    json_out: Optional[Path] = typer.Option(None, "--json", help="Also write the AssumptionReport as JSON."),
) -> None:
    state = _state(ctx)
    eta = state.settings.harness.eta if eta is None else eta
    parameters = {"model": model, "n": n, "eta": eta}
    with _guard(state, "check", parameters) as outcome:
        report = check_assumptions(resolve_model(model), n, eta)

        table = Table(title=f"{model} at n={report.n}, eta={report.eta:g}")
        table.add_column("assumption")
        table.add_column("value", justify="right")
        table.add_column("threshold", justify="right")
        table.add_column("verdict")
        table.add_row("A0 distinct eigenvalues", _fmt(report.a0_min_relative_gap), "> 1e-09", _verdict(report.a0_distinct_eigenvalues))
        if report.dcsbm_radius is None:
            table.add_row("A1 separation", _fmt(report.a1_min_separation), _fmt(report.a1_threshold), _verdict(report.a1_separation))
        table.add_row("A2 eigengap", _fmt(report.a2_gamma_n), _fmt(report.a2_threshold), _verdict(report.a2_gap))
        if report.dcsbm_radius is not None:
            table.add_row("DCSBM radius", _fmt(report.dcsbm_radius), _fmt(report.dcsbm_threshold), _verdict(report.dcsbm_condition))
        caption = f"beta={report.beta:.6g} Delta={report.Delta:.6g} gamma={report.gamma:.6g}"
        if report.beta_hypothesis_violated:
            caption += " (eigengap hypothesis violated: beta is not a valid bound)"
        table.caption = caption
        console = Console(width=120)
        console.print(table)

        terms = Table(title="2->inf error terms")
        terms.add_column("term")
        terms.add_column("bound", justify="right")
        for name, value in report.beta_terms.items():
            terms.add_row(name, _fmt(value))
        console.print(terms)

        if json_out is not None:
            write_json(json_out, report)
            outcome.wrote("report", json_out)


@app.command(help="Run seeded trials over a grid of n and write records, a summary and an optional plot.")
def sweep(
    ctx: typer.Context,
    model: str = typer.Option(..., "--model", help="Preset name or path to a model JSON."),
    n_grid: Optional[str] = typer.Option(None, "--n", help="Comma-separated ascending vertex counts."),
    trials: Optional[int] = typer.Option(None, "--trials", min=1, help="Trials per n."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Base seed."),
    restarts: Optional[int] = typer.Option(None, "--restarts", min=1, help="k-means++ restarts per trial."),
    eta: Optional[float] = typer.Option(None, "--eta", help="Failure probability in (0, 1/2)."),
    d: Optional[int] = typer.Option(None, "--d", min=1, help="Latent dimension (default: rank of B)."),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Parallel trials (default: ASECLUSTER_THREADS)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory (default: a new run folder)."),
    plot: bool = typer.Option(False, "--plot", help="Also write the error-decay SVG."),
    progress: bool = typer.Option(False, "--progress", help="Show a progress bar."),
) -> None:
    state = _state(ctx)
    harness = state.settings.harness
    trials = trials or harness.trials
    seed = harness.base_seed if seed is None else seed
    threads = threads or state.settings.env.threads
    parameters = {"model": model, "n": n_grid, "trials": trials, "seed": seed, "restarts": restarts, "eta": eta, "threads": threads}
    with _guard(state, "sweep", parameters) as outcome:
        grid = _int_grid(n_grid) or harness.n_grid
        config = resolve_model(model)
        settings = state.settings.trial_settings(eta=eta, restarts=restarts, d=d)
        result = run_sweep(config, grid, trials, seed, threads, settings=settings, progress=progress)

        directory = out or new_run_dir(state.runs_dir)
        directory.mkdir(parents=True, exist_ok=True)
        records = records_frame(result.records)
        write_csv(directory / "records.csv", records, state.settings.output.float_format)
        write_json(directory / "summary.json", result.summary)
        outcome.wrote("records", directory / "records.csv")
        outcome.wrote("summary", directory / "summary.json")
        if plot or state.settings.output.plot:
            outcome.wrote("plot", plot_error_decay(records, directory / "error_decay.svg", title=config.id))

        fit = result.summary.fit
        slope = "n/a" if fit is None else f"{fit.slope:.3f} [{fit.ci_low:.3f}, {fit.ci_high:.3f}]"
        typer.echo(f"{len(result.records)} trials; log-log slope {slope}; outputs in {directory}")


@app.command(help="Compare the clustering objective on true and embedded positions as n grows.")
def consistency(
    ctx: typer.Context,
    distribution: str = typer.Option("point-mass-pair", "--distribution", help="Preset name or path to a distribution JSON."),
    n_grid: str = typer.Option("500,1000,2000,4000", "--n", help="Comma-separated ascending vertex counts."),
    k: int = typer.Option(2, "--k", min=1, help="Number of clusters."),
    trials: int = typer.Option(50, "--trials", min=1, help="Paired trials per n."),
    seed: int = typer.Option(0, "--seed", min=0, help="Base seed."),
    restarts: Optional[int] = typer.Option(None, "--restarts", min=1, help="k-means++ restarts."),
    phi: str = typer.Option("square", "--phi", help="Loss: square, abs or power:<p>."),
    threads: Optional[int] = typer.Option(None, "--threads", min=1, help="Parallel trials (default: ASECLUSTER_THREADS)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory (default: a new run folder)."),
) -> None:
    state = _state(ctx)
    threads = threads or state.settings.env.threads
    parameters = {"distribution": distribution, "n": n_grid, "k": k, "trials": trials, "seed": seed, "phi": phi}
    with _guard(state, "consistency", parameters) as outcome:
        grid = _int_grid(n_grid) or []
        dist_config = resolve_distribution(distribution)
        result = consistency_experiment(
            build_distribution(dist_config),
            grid,
            k,
            trials,
            seed,
            restarts=restarts or state.settings.clustering.restarts,
            phi=phi,
            parallelism=threads,
        )

        directory = out or new_run_dir(state.runs_dir)
        frame = pd.DataFrame([record.to_row() for record in result.records], columns=list(CONSISTENCY_COLUMNS))
        write_csv(directory / "consistency.csv", frame, state.settings.output.float_format)
        write_json(
            directory / "consistency.json",
            {
                "distribution": dist_config.id,
                "K": k,
                "phi": phi,
                "trials": trials,
                "seed": seed,
                "rows": [row.model_dump(mode="python") for row in result.summary],
            },
        )
        outcome.wrote("records", directory / "consistency.csv")
        outcome.wrote("summary", directory / "consistency.json")
        for row in result.summary:
            typer.echo(f"n={row.n}: mean gap {row.mean_gap:.6g} over {row.trials - row.degenerate} trials")


@app.command(help="Render a records CSV as an error-decay chart or an embedding CSV as a scatter.")
def plot(
    ctx: typer.Context,
    source: Path = typer.Argument(..., help="records.csv from sweep, or an embedding CSV."),
    out: Optional[Path] = typer.Option(None, "--out", help="SVG path (default: next to the input)."),
    labels: Optional[Path] = typer.Option(None, "--labels", help="Labels CSV to colour embedding points."),
    sphere: bool = typer.Option(False, "--sphere", help="Add the unit-sphere projection panel."),
    column: str = typer.Option("err_2inf", "--column", help="Records column to plot against n."),
) -> None:
    state = _state(ctx)
    parameters = {"source": source, "out": out, "labels": labels, "sphere": sphere, "column": column}
    with _guard(state, "plot", parameters) as outcome:
        if not source.exists():
            raise FileNotFoundError(f"plot input not found: {source}")
        path = out or source.with_suffix(".svg")
        header = pd.read_csv(source, nrows=0).columns
        if "n" in header and column in header:
            plot_error_decay(pd.read_csv(source), path, column=column)
        elif "x1" in header:
            Xhat = read_embedding(source)
            colours = read_labels(labels) if labels is not None else None
            plot_embedding(Xhat, path, labels=colours, projected=project_sphere(Xhat) if sphere else None)
        else:
            raise PreconditionError(
                f"plot input must be a records CSV with 'n' and '{column}' or an embedding CSV (got {list(header)})"
            )
        outcome.wrote("plot", path)
        typer.echo(f"Wrote {path}")


@app.command(help="Evaluate the assumptions for sparse two-block models B = (1/n)[[a, b], [b, a]].")
def regime(
    ctx: typer.Context,
    a: str = typer.Option(..., "--a", help="Growth expression for a, e.g. '2*n^0.9'."),
    b: str = typer.Option(..., "--b", help="Growth expression for b, e.g. 'n^0.8'."),
    n_grid: str = typer.Option("1e3,1e4,1e5,1e6,1e8,1e12", "--n", help="Comma-separated n values."),
    eta: Optional[float] = typer.Option(None, "--eta", help="Failure probability in (0, 1/2)."),
    json_out: Optional[Path] = typer.Option(None, "--json", help="Also write the report as JSON."),
) -> None:
    state = _state(ctx)
    eta = state.settings.harness.eta if eta is None else eta
    parameters = {"a": a, "b": b, "n": n_grid, "eta": eta}
    with _guard(state, "regime", parameters) as outcome:
        grid = _float_grid(n_grid) or []
        report = sparse_regime(a, b, grid, eta)

        table = Table(title=f"a = {report.a_expr}, b = {report.b_expr}, eta={eta:g}")
        for name in ("n", "a", "b", "A1 log-ratio", "A1", "A2 log-ratio", "A2"):
            table.add_column(name, justify="right")
        for row in report.rows:
            table.add_row(
                f"{row.n:.3g}",
                _fmt(row.a),
                _fmt(row.b),
                f"{row.a1_log_ratio:.3f}",
                _verdict(row.a1_holds),
                f"{row.a2_log_ratio:.3f}",
                _verdict(row.a2_holds),
            )
        table.caption = (
            f"case {report.case if report.case is not None else '-'}: {report.case_description}; "
            f"asymptotically A1 {_verdict(report.predicted_a1)}, A2 {_verdict(report.predicted_a2)}"
        )
        Console(width=120).print(table)

        if json_out is not None:
            write_json(json_out, report)
            outcome.wrote("report", json_out)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code (usage errors map to 1)."""

    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(sys.argv[1:] if argv is None else argv), prog_name="ase-cluster", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.exceptions.Abort:
        typer.secho("Aborted.", err=True, fg=typer.colors.RED)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        typer.secho(f"Error: {exc.format_message()}", err=True, fg=typer.colors.RED)
        return EXIT_VALIDATION
    return int(result) if isinstance(result, int) else 0


def main_entry() -> None:
    """Console-script entry point."""

    raise SystemExit(cli_main())


__all__ = ["app", "cli_main", "main_entry"]
