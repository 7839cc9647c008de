"""Command bodies: each reads its inputs, runs one workflow and writes its outputs.

They raise ``GraphLabError`` on failure and return a nonzero exit code only for
report-grade outcomes (bound violations found in report mode).
"""
import typing as t
from datetime import datetime
from logging import getLogger
from pathlib import Path

from . import plot
from .config import VERSION
from .errors import BoundViolation, ConfigError, GraphLabError, ReplicaFailure
from .evi import evi_sweep, filter_sample, sweep_frame
from .evolution import (
    ReplicaOutcome,
    Trajectory,
    init_graph,
    load_config,
    replicate,
    run,
    sweep_m0,
)
from .ingest import EdgeFormat, read_temporal_edges, snapshot_series
from .metrics import tail_counts
from .storage import (
    read_values,
    write_csv,
    write_edge_list,
    write_json,
    write_values,
)

logger = getLogger(__name__)

PathLike = t.Union[str, Path]


class RunManifest:
    def __init__(self, command: str, config: t.Dict[str, t.Any], seed: t.Optional[int] = None) -> None:
        self.command = command
        self.config = config
        self.seed = seed
        self.version = VERSION
        self.started = datetime.now().isoformat()
        self.finished: t.Optional[str] = None
        self.outputs: t.List[str] = []
        self.extra: t.Dict[str, t.Any] = {}

    def add(self, path: Path) -> Path:
        self.outputs.append(path.name if path.parent.name != "replicas" else f"replicas/{path.name}")
        logger.info(f"wrote {path}")
        return path

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            **self.extra,
        }

    def write(self, out_dir: Path) -> Path:
        self.finished = datetime.now().isoformat()
        path = out_dir.joinpath("manifest.json")
        write_json(self.as_dict(), path)
        logger.info(f"wrote {path}")
        return path


def _out_dir(path: PathLike) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _split(text: str) -> t.List[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def parse_ints(text: str) -> t.List[int]:
    try:
        return [int(s) for s in _split(text)]
    except ValueError:
        raise ConfigError(f"expected comma separated integers, got {text!r}")


def parse_floats(text: str) -> t.List[float]:
    try:
        return [float(s) for s in _split(text)]
    except ValueError:
        raise ConfigError(f"expected comma separated numbers, got {text!r}")


def _write_trajectory(trajectory: Trajectory, out: Path, manifest: RunManifest, name: str) -> None:
    if trajectory.records:
        manifest.add(write_csv(trajectory.frame(), out.joinpath(name)))


def cmd_evolve(config_path: PathLike, out_dir: PathLike, plots: bool = False, progress: bool = False) -> int:
    config = load_config(config_path)
    out = _out_dir(out_dir)
    manifest = RunManifest("evolve", config.as_dict(), config.seed)
    try:
        trajectory = run(config, progress=progress)
    except GraphLabError as e:
        if e.trajectory is not None:
            _write_trajectory(e.trajectory, out, manifest, "trajectory.partial.csv")
        manifest.extra["error"] = str(e)
        manifest.write(out)
        raise

    g = trajectory.graph
    assert g is not None
    _write_trajectory(trajectory, out, manifest, "trajectory.csv")
    manifest.add(write_edge_list(g.edges(), out.joinpath("final_graph.edges")))
    ids = g.node_ids()
    manifest.add(write_values(g.degree[ids], out.joinpath("final_degrees.txt")))
    manifest.add(write_values(g.triangles[ids], out.joinpath("final_triangles.txt")))
    if plots:
        frame = trajectory.frame()
        manifest.add(plot.plot_increments(frame, trajectory.v0_size, out.joinpath("increments.svg")))
        if config.tracked_nodes:
            manifest.add(plot.plot_tracked(frame, config.tracked_nodes, out.joinpath("tracked_degrees.svg")))

    k_min = config.m0 if config.deletion == "none" else 0
    manifest.extra["tail_counts"] = tail_counts(g, k_min)._asdict()
    manifest.extra["bound_violations"] = trajectory.bound_violations
    manifest.extra["bound_slack_hits"] = trajectory.slack_hits
    manifest.write(out)
    if trajectory.bound_violations:
        logger.error(f"increment bound violated at steps {trajectory.bound_violations}")
        return BoundViolation.exit_code
    return 0


def _write_replica(outcome: ReplicaOutcome, out: Path, manifest: RunManifest) -> None:
    data = {
        "replica": outcome.replica,
        "config": outcome.config.as_dict(),
        "summary": outcome.summary,
        "error": None if outcome.error is None else str(outcome.error),
        "exit_code": None if outcome.error is None else getattr(outcome.error, "exit_code", 4),
    }
    manifest.add(write_json(data, out.joinpath("replicas", f"replica-{outcome.replica}.json")))


def cmd_replicate(
    config_path: PathLike,
    runs: int,
    out_dir: PathLike,
    tolerate_failures: bool = False,
    plots: bool = False,
    progress: bool = False,
) -> int:
    config = load_config(config_path)
    out = _out_dir(out_dir)
    manifest = RunManifest("replicate", config.as_dict(), config.seed)
    manifest.extra["runs"] = runs
    try:
        result = replicate(config, runs, tolerate_failures=tolerate_failures, progress=progress)
    except ReplicaFailure as e:
        for outcome in e.outcomes:
            _write_replica(outcome, out, manifest)
        manifest.extra["error"] = str(e)
        manifest.write(out)
        raise

    for outcome in result.outcomes:
        _write_replica(outcome, out, manifest)
    manifest.add(write_csv(result.averages, out.joinpath("averages.csv")))
    if plots:
        v0_size = len(init_graph(config.initial))
        manifest.add(plot.plot_increments(result.averages, v0_size, out.joinpath("increments.svg"), "delta_bar"))
        if config.tracked_nodes:
            manifest.add(
                plot.plot_tracked(result.averages, config.tracked_nodes, out.joinpath("tracked_degrees.svg"), "k_bar_")
            )
    manifest.extra["failures"] = sorted(result.failures)
    manifest.write(out)
    return 0


def cmd_evi(
    input_path: PathLike,
    out_dir: PathLike,
    estimators: t.Sequence[str],
    s_grid: t.Sequence[float],
    min_exclusive: float = 0.0,
    plots: bool = False,
) -> int:
    values = read_values(input_path)
    sample = filter_sample(values, min_exclusive, min_size=3)
    results = evi_sweep(sample, estimators, s_grid)
    out = _out_dir(out_dir)
    manifest = RunManifest(
        "evi",
        {
            "input": str(input_path),
            "estimators": list(estimators),
            "s_grid": list(s_grid),
            "min_exclusive": min_exclusive,
        },
    )
    manifest.extra["n"] = sample.n
    frame = sweep_frame(results)
    manifest.add(write_csv(frame, out.joinpath("evi_sweep.csv")))
    if plots:
        manifest.add(plot.plot_sweep(frame, out.joinpath("evi_sweep.svg")))
    manifest.write(out)
    return 0


def cmd_ingest(
    edges_path: PathLike,
    out_dir: PathLike,
    window: int,
    mode: str = "cumulative",
    tracked: t.Sequence[int] = (),
    degree_mode: str = "simple",
    plots: bool = False,
    columns: t.Optional[t.Sequence[str]] = None,
) -> int:
    fmt = EdgeFormat.with_columns(columns) if columns else EdgeFormat.for_path(edges_path)
    parsed = read_temporal_edges(edges_path, fmt)
    series = snapshot_series(parsed.events, window, mode, tracked, degree_mode)
    out = _out_dir(out_dir)
    manifest = RunManifest(
        "ingest",
        {
            "input": str(edges_path),
            "window": window,
            "mode": mode,
            "tracked": list(tracked),
            "degree": degree_mode,
            "columns": list(columns) if columns else None,
        },
    )
    manifest.extra["events"] = len(parsed.events)
    manifest.extra["self_loops"] = parsed.self_loops
    frame = series.frame()
    manifest.add(write_csv(frame, out.joinpath("window_series.csv")))
    manifest.add(write_values(series.final_degrees, out.joinpath("final_degrees.txt")))
    manifest.add(write_values(series.final_triangles, out.joinpath("final_triangles.txt")))
    if plots:
        manifest.add(plot.plot_window_series(frame, out.joinpath("window_series.svg")))
    manifest.write(out)
    return 0


def cmd_sweep_m0(
    config_path: PathLike,
    m0_values: t.Sequence[int],
    runs: int,
    out_dir: PathLike,
    tolerate_failures: bool = False,
) -> int:
    config = load_config(config_path)
    out = _out_dir(out_dir)
    manifest = RunManifest("sweep-m0", config.as_dict(), config.seed)
    manifest.extra["m0_values"] = list(m0_values)
    manifest.extra["runs"] = runs
    frame = sweep_m0(config, m0_values, runs, tolerate_failures=tolerate_failures)
    manifest.add(write_csv(frame, out.joinpath("sweep_m0.csv")))
    manifest.write(out)
    return 0
