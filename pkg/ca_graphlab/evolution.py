"""Step-by-step clustering-attachment evolution, with optional node or edge deletion."""
import os
import typing as t
from concurrent import futures
from itertools import combinations
from logging import getLogger
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from tqdm import tqdm

from .attachment import (
    AttachmentParams,
    WeightIndex,
    check_index,
    graph_weights,
    refresh_weights,
    sample_targets,
)
from .config import BOUND_ATOL, RECOMPUTE_PERIOD, THREADS_ENV
from .entities import ABSENT, MetricsRecord, NodeId, StepReport, TrackedState
from .errors import (
    BoundViolation,
    ConfigError,
    FileParseError,
    GraphLabError,
    InvalidKind,
    ModelPreconditionError,
    ReplicaFailure,
)
from .graph import Graph
from .metrics import avg_clustering, increment_bounds, tail_counts, total_triangles
from .storage import read_edge_list

logger = getLogger(__name__)

Deletion = t.Literal["none", "node", "edge"]
DELETIONS = ("none", "node", "edge")
EDGE_POOLS = ("post", "pre")
BOUND_CHECKS = ("assert", "report", "off")
CONFIG_KEYS = (
    "alpha",
    "epsilon",
    "attachment",
    "m0",
    "steps",
    "deletion",
    "initial",
    "seed",
    "tracked_nodes",
    "recompute_period",
    "forced_targets",
    "edge_pool",
    "bound_check",
)

_RECTANGLE = [(1, 2), (2, 3), (3, 4), (4, 1)]


def _complete(n: int) -> Graph:
    nodes = range(1, n + 1)
    return Graph.from_edges(combinations(nodes, 2), nodes=nodes)


def init_graph(kind: str) -> Graph:
    name, _, arg = kind.partition(":")
    name = name.strip().lower()
    if name == "triangle":
        return _complete(3)
    if name == "rectangle":
        return Graph.from_edges(_RECTANGLE)
    if name == "rectangle_diag":
        return Graph.from_edges(_RECTANGLE + [(1, 3)])
    if name == "icosahedron_full":
        return _complete(12)
    if name == "complete":
        try:
            n = int(arg)
        except ValueError:
            raise InvalidKind(f"complete graph needs a size, got {kind!r}")
        if n < 1:
            raise InvalidKind(f"complete graph needs at least one node, got {n}")
        return _complete(n)
    if name == "file":
        if not arg:
            raise InvalidKind(f"file initial graph needs a path, got {kind!r}")
        edges = read_edge_list(arg)
        if not edges:
            raise FileParseError(f"edge list {arg} holds no edges")
        return Graph.from_edges(edges)
    raise InvalidKind(f"unknown initial graph {kind!r}")


def _as_int(key: str, value: t.Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    try:
        parsed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if parsed != value and not isinstance(value, str):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return parsed


def _as_float(key: str, value: t.Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}")


def _as_ids(key: str, value: t.Any) -> t.List[NodeId]:
    if value is None:
        return []
    if isinstance(value, (int, str)):
        value = [value]
    return [_as_int(key, v) for v in value]


class EvolutionConfig:
    def __init__(
        self,
        params: t.Optional[AttachmentParams] = None,
        m0: int = 2,
        steps: int = 0,
        deletion: str = "none",
        initial: str = "triangle",
        seed: int = 0,
        tracked_nodes: t.Sequence[NodeId] = (),
        recompute_period: int = RECOMPUTE_PERIOD,
        forced_targets: t.Optional[t.Sequence[NodeId]] = None,
        edge_pool: str = "post",
        bound_check: str = "assert",
    ) -> None:
        self.params = params or AttachmentParams()
        self.m0 = m0
        self.steps = steps
        self.deletion = deletion
        self.initial = initial
        self.seed = seed
        self.tracked_nodes = list(tracked_nodes)
        self.recompute_period = recompute_period
        self.forced_targets = list(forced_targets) if forced_targets else None
        self.edge_pool = edge_pool
        self.bound_check = bound_check
        self.validate()

    def validate(self) -> None:
        if self.m0 < 2:
            raise ConfigError(f"m0 must be at least 2, got {self.m0}")
        if self.steps < 0:
            raise ConfigError(f"steps must be nonnegative, got {self.steps}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.recompute_period < 1:
            raise ConfigError(f"recompute_period must be positive, got {self.recompute_period}")
        if self.deletion not in DELETIONS:
            raise ConfigError(f"deletion must be one of {DELETIONS}, got {self.deletion!r}")
        if self.edge_pool not in EDGE_POOLS:
            raise ConfigError(f"edge_pool must be one of {EDGE_POOLS}, got {self.edge_pool!r}")
        if self.bound_check not in BOUND_CHECKS:
            raise ConfigError(f"bound_check must be one of {BOUND_CHECKS}, got {self.bound_check!r}")
        if self.forced_targets is not None:
            if len(self.forced_targets) != self.m0 or len(set(self.forced_targets)) != self.m0:
                raise ConfigError(f"forced_targets must name {self.m0} distinct nodes, got {self.forced_targets}")
            if self.deletion != "none":
                raise ConfigError("forced_targets cannot be combined with deletion")

    @property
    def checks_bound(self) -> bool:
        """The increment envelope holds only for two targets without deletion."""
        return self.bound_check != "off" and self.m0 == 2 and self.deletion == "none"

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "alpha": self.params.alpha,
            "epsilon": self.params.epsilon,
            "attachment": self.params.family,
            "m0": self.m0,
            "steps": self.steps,
            "deletion": self.deletion,
            "initial": self.initial,
            "seed": self.seed,
            "tracked_nodes": list(self.tracked_nodes),
            "recompute_period": self.recompute_period,
            "forced_targets": list(self.forced_targets) if self.forced_targets else None,
            "edge_pool": self.edge_pool,
            "bound_check": self.bound_check,
        }

    @classmethod
    def from_dict(cls, data: t.Dict[str, t.Any]) -> "EvolutionConfig":
        unknown = sorted(set(data) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {unknown}")
        deletion = data.get("deletion") or "none"
        forced = data.get("forced_targets")
        # yaml reads a bare off as false
        bound_check = data.get("bound_check", "assert")
        if bound_check is False:
            bound_check = "off"
        return cls(
            params=AttachmentParams(
                alpha=_as_float("alpha", data.get("alpha", 1.0)),
                epsilon=_as_float("epsilon", data.get("epsilon", 0.0)),
                family=str(data.get("attachment", "ca")),
            ),
            m0=_as_int("m0", data.get("m0", 2)),
            steps=_as_int("steps", data.get("steps", 0)),
            deletion=str(deletion).lower(),
            initial=str(data.get("initial", "triangle")),
            seed=_as_int("seed", data.get("seed", 0)),
            tracked_nodes=_as_ids("tracked_nodes", data.get("tracked_nodes")),
            recompute_period=_as_int("recompute_period", data.get("recompute_period", RECOMPUTE_PERIOD)),
            forced_targets=_as_ids("forced_targets", forced) if forced is not None else None,
            edge_pool=str(data.get("edge_pool", "post")).lower(),
            bound_check=str(bound_check).lower(),
        )

    def replace(self, **changes: t.Any) -> "EvolutionConfig":
        return EvolutionConfig.from_dict({**self.as_dict(), **changes})

    def with_seed(self, seed: int) -> "EvolutionConfig":
        return self.replace(seed=seed)

    def __repr__(self) -> str:
        return f"EvolutionConfig({self.as_dict()})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, EvolutionConfig) and self.as_dict() == other.as_dict()


def load_config(path: t.Union[str, Path]) -> EvolutionConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"config {path} is not a key-value file: {e}")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a flat mapping of keys to values")
    return EvolutionConfig.from_dict(data)


def _choose_targets(
    g: Graph,
    config: EvolutionConfig,
    rng: np.random.Generator,
    index: t.Optional[WeightIndex],
) -> t.List[NodeId]:
    if config.forced_targets is not None:
        for u in config.forced_targets:
            g.neighbors(u)
        return list(config.forced_targets)
    return sample_targets(g, config.params, config.m0, rng, index)


def step(
    g: Graph,
    config: EvolutionConfig,
    rng: np.random.Generator,
    t: int,
    index: t.Optional[WeightIndex] = None,
) -> StepReport:
    """Append node ||V_0||+t+1, attach it to m0 targets, then apply the deletion rule.

    ``index``, when given, must hold the weights of ``g`` and is refreshed for the
    nodes this step touched.
    """
    try:
        targets = _choose_targets(g, config, rng, index)
    except ModelPreconditionError as e:
        raise e.at_step(t)
    target_degrees = tuple(int(g.degree[j]) for j in targets)
    target_clustering = tuple(g.clustering_coefficient(j) for j in targets)
    adjacent_pairs = sum(1 for a, b in combinations(targets, 2) if g.has_edge(a, b))

    new_node = g.add_node()
    for j in targets:
        g.add_edge(new_node, j)

    removed_node = None
    removed_edge = None
    if config.deletion == "node":
        # the appended node sits last in the node pool and is exempt this step
        candidates = len(g) - 1
        if candidates > 0:
            removed_node = g.node_at(int(rng.integers(candidates)))
            g.remove_node(removed_node)
    elif config.deletion == "edge":
        # new edges sit last in the edge pool
        candidates = g.n_edges if config.edge_pool == "post" else g.n_edges - len(targets)
        if candidates > 0:
            removed_edge = g.edge_at(int(rng.integers(candidates)))
            g.remove_edge(*removed_edge)

    touched = g.drain_touched()
    if index is not None:
        refresh_weights(index, g, touched, config.params)
    return StepReport(
        t=t,
        new_node=new_node,
        targets=tuple(targets),
        target_degrees=target_degrees,
        target_clustering=target_clustering,
        adjacent_pairs=adjacent_pairs,
        removed_node=removed_node,
        removed_edge=removed_edge,
    )


class Trajectory:
    records: t.List[MetricsRecord]
    reports: t.List[StepReport]

    def __init__(self, config: EvolutionConfig) -> None:
        self.config = config
        self.records = []
        self.reports = []
        self.graph: t.Optional[Graph] = None
        self.v0_size = 0
        self.bound_violations: t.List[int] = []
        self.slack_hits: t.List[int] = []

    def __len__(self) -> int:
        return len(self.records)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.row() for r in self.records])

    def states(self, steps: t.Iterable[int]) -> t.Dict[int, Graph]:
        """Graphs G_s at the given steps, rebuilt by replaying the config."""
        wanted = sorted(set(steps))
        if not wanted:
            return {}
        evolution = Evolution(self.config)
        states: t.Dict[int, Graph] = {}
        for s in range(wanted[-1] + 1):
            if s in wanted:
                states[s] = evolution.graph.copy()
            if s < wanted[-1]:
                evolution.advance()
        return states


class Evolution:
    def __init__(self, config: EvolutionConfig, progress: bool = False) -> None:
        self.config = config
        self.progress = progress
        self.graph = init_graph(config.initial)
        self.v0_size = len(self.graph)
        self._check_tracked()
        if config.forced_targets is not None:
            missing = [u for u in config.forced_targets if u not in self.graph]
            if missing:
                raise ConfigError(f"forced targets {missing} are not in the initial graph")
        self.rng = np.random.default_rng(config.seed)
        self.index = WeightIndex.for_graph(self.graph, config.params)
        self.t = 0
        self.trajectory = Trajectory(config)
        self.trajectory.graph = self.graph
        self.trajectory.v0_size = self.v0_size

    def _check_tracked(self) -> None:
        # nodes born later are allowed and report zeros until they appear
        last = self.graph.next_id + self.config.steps
        bad = [
            i
            for i in self.config.tracked_nodes
            if i not in self.graph and not self.graph.next_id <= i < last
        ]
        if bad:
            raise ConfigError(f"tracked nodes {bad} are neither initial nor appended nodes")

    def tracked_state(self, i: NodeId) -> TrackedState:
        g = self.graph
        if i not in g:
            return ABSENT
        return TrackedState(int(g.degree[i]), int(g.triangles[i]), g.clustering_coefficient(i))

    def record(self) -> MetricsRecord:
        g = self.graph
        rec = MetricsRecord(
            t=self.t,
            n_nodes=len(g),
            n_edges=g.n_edges,
            avg_clustering=avg_clustering(g),
            total_triangles=total_triangles(g),
            tracked={i: self.tracked_state(i) for i in self.config.tracked_nodes},
        )
        records = self.trajectory.records
        if records:
            prev = records[-1]
            prev.increment = prev.avg_clustering - rec.avg_clustering
            self._check_bound(prev)
        records.append(rec)
        return rec

    def _check_bound(self, rec: MetricsRecord) -> None:
        if not self.config.checks_bound or rec.increment is None:
            return
        envelope = increment_bounds(self.v0_size, rec.t)
        if envelope.contains(rec.increment):
            return
        if envelope.contains(rec.increment, BOUND_ATOL):
            logger.info(f"increment within rounding of the envelope edge {rec.t=} {rec.increment=} {envelope=}")
            self.trajectory.slack_hits.append(rec.t)
            return
        if self.config.bound_check == "assert":
            raise BoundViolation(rec.t, rec.increment, envelope.lower, envelope.upper)
        logger.warning(f"bound violation {rec.t=} {rec.increment=} {envelope=}")
        self.trajectory.bound_violations.append(rec.t)

    def advance(self) -> StepReport:
        report = step(self.graph, self.config, self.rng, self.t, self.index)
        self.t += 1
        if self.t % self.config.recompute_period == 0:
            drift = self.index.drift()
            if not check_index(self.index, self.graph, self.config.params):
                logger.debug(f"weight index drifted {self.t=} {drift=}")
            self.index.rebuild(graph_weights(self.graph, self.config.params))
        return report

    def step(self) -> MetricsRecord:
        self.trajectory.reports.append(self.advance())
        return self.record()

    def __call__(self) -> Trajectory:
        config = self.config
        logger.info(f"evolve {config.as_dict()}")
        try:
            self.record()
            for _ in tqdm(range(config.steps), disable=not self.progress):
                self.step()
        except GraphLabError as e:
            e.trajectory = self.trajectory
            raise
        last = self.trajectory.records[-1]
        logger.info(f"done {last}")
        return self.trajectory


def run(config: EvolutionConfig, progress: bool = False) -> Trajectory:
    return Evolution(config, progress=progress)()


class ReplicaOutcome(t.NamedTuple):
    replica: int
    config: EvolutionConfig
    frame: t.Optional[pd.DataFrame]
    summary: t.Dict[str, t.Any]
    error: t.Optional[BaseException]


def _summary(trajectory: Trajectory) -> t.Dict[str, t.Any]:
    g = trajectory.graph
    last = trajectory.records[-1]
    assert g is not None
    tails = tail_counts(g, trajectory.config.m0 if trajectory.config.deletion == "none" else 0)
    return {
        "n_nodes": last.n_nodes,
        "n_edges": last.n_edges,
        "avg_clustering": last.avg_clustering,
        "total_triangles": last.total_triangles,
        "bound_violations": list(trajectory.bound_violations),
        "bound_slack_hits": list(trajectory.slack_hits),
        "tail_counts": tails._asdict(),
    }


def run_replica(config: EvolutionConfig, replica: int) -> ReplicaOutcome:
    seeded = config.with_seed(config.seed + replica)
    try:
        trajectory = run(seeded)
    except GraphLabError as e:
        # the partial trajectory stays in the worker
        e.trajectory = None
        logger.error(f"replica failed {replica=} {e}")
        return ReplicaOutcome(replica, seeded, None, {}, e)
    return ReplicaOutcome(replica, seeded, trajectory.frame(), _summary(trajectory), None)


def replica_workers(runs: int, workers: t.Optional[int] = None) -> int:
    if workers is None:
        cap = os.environ.get(THREADS_ENV)
        try:
            workers = int(cap) if cap else (os.cpu_count() or 1)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, min(workers, runs))


class ReplicateResult:
    def __init__(
        self,
        averages: pd.DataFrame,
        outcomes: t.List[ReplicaOutcome],
        failures: t.Dict[int, BaseException],
    ) -> None:
        self.averages = averages
        self.outcomes = outcomes
        self.failures = failures

    @property
    def successes(self) -> t.List[ReplicaOutcome]:
        return [o for o in self.outcomes if o.error is None]


def average_series(frames: t.Sequence[pd.DataFrame], tracked: t.Sequence[NodeId]) -> pd.DataFrame:
    def mean(column: str) -> t.Any:
        return np.stack([f[column].to_numpy(dtype=np.float64) for f in frames]).mean(axis=0)

    averages = pd.DataFrame({"t": frames[0]["t"].to_numpy(), "delta_bar": mean("delta")})
    for i in tracked:
        averages[f"k_bar_{i}"] = mean(f"k_{i}")
        averages[f"tri_bar_{i}"] = mean(f"tri_{i}")
    return averages


def replicate(
    config: EvolutionConfig,
    runs: int,
    tolerate_failures: bool = False,
    workers: t.Optional[int] = None,
    progress: bool = False,
) -> ReplicateResult:
    if runs < 1:
        raise ConfigError(f"runs must be at least 1, got {runs}")
    workers = replica_workers(runs, workers)
    logger.info(f"replicate {runs=} {workers=} seed={config.seed}")
    outcomes: t.List[ReplicaOutcome] = []
    if workers == 1:
        for r in tqdm(range(runs), disable=not progress):
            outcomes.append(run_replica(config, r))
    else:
        with futures.ProcessPoolExecutor(max_workers=workers) as executor:
            futs = [executor.submit(run_replica, config, r) for r in range(runs)]
            for r, fut in enumerate(tqdm(futs, disable=not progress)):
                try:
                    outcomes.append(fut.result())
                except Exception as e:
                    logger.error(f"replica crashed {r=} {e}")
                    outcomes.append(ReplicaOutcome(r, config.with_seed(config.seed + r), None, {}, e))

    failures = {o.replica: o.error for o in outcomes if o.error is not None}
    frames = [o.frame for o in outcomes if o.frame is not None]
    if failures and (not tolerate_failures or not frames):
        raise ReplicaFailure(failures, outcomes)
    if failures:
        logger.error(f"averaging over {len(frames)} of {runs} replicas")
    return ReplicateResult(average_series(frames, config.tracked_nodes), outcomes, failures)


def sweep_m0(
    config: EvolutionConfig,
    m0_values: t.Sequence[int],
    runs: int,
    tolerate_failures: bool = False,
    workers: t.Optional[int] = None,
) -> pd.DataFrame:
    """Final total triangle counts averaged over replicas, for each m0."""
    rows = []
    for m0 in m0_values:
        result = replicate(
            config.replace(m0=m0),
            runs,
            tolerate_failures=tolerate_failures,
            workers=workers,
        )
        triangles = np.array([o.summary["total_triangles"] for o in result.successes], dtype=np.float64)
        isolated = np.array([o.summary["tail_counts"]["isolated"] for o in result.successes], dtype=np.float64)
        rows.append(
            {
                "m0": m0,
                "mean_total_triangles": triangles.mean(),
                "std_total_triangles": triangles.std(),
                "mean_isolated": isolated.mean(),
                "runs": len(triangles),
            }
        )
        logger.info(f"sweep {rows[-1]}")
    return pd.DataFrame(rows, columns=["m0", "mean_total_triangles", "std_total_triangles", "mean_isolated", "runs"])
