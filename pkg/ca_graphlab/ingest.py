"""Timestamped edge streams to windowed graph snapshots and their clustering series."""
import csv
import typing as t
from logging import getLogger
from pathlib import Path

import numpy as np
import pandas as pd
from cytoolz.curried import concat, frequencies, groupby, map, pipe, unique

from .entities import ABSENT, Edge, MetricsRecord, NodeId, TemporalEdgeEvent, TrackedState, edge_key
from .errors import ConfigError, EmptyInput, ParseError
from .evolution import Evolution, EvolutionConfig
from .graph import Graph
from .metrics import avg_clustering, total_triangles

logger = getLogger(__name__)

Mode = t.Literal["cumulative", "per_window"]
MODES = ("cumulative", "per_window")
DEGREE_MODES = ("simple", "multiplicity")


class EdgeFormat:
    """``text``: whitespace separated ``u v t``; ``csv``: a header row and named columns."""

    def __init__(
        self,
        kind: str = "text",
        u: str = "u",
        v: str = "v",
        timestamp: str = "t",
        delimiter: str = ",",
    ) -> None:
        if kind not in ("text", "csv"):
            raise ConfigError(f"edge format must be text or csv, got {kind!r}")
        self.kind = kind
        self.columns = (u, v, timestamp)
        self.delimiter = delimiter

    @classmethod
    def for_path(cls, path: t.Union[str, Path]) -> "EdgeFormat":
        return cls("csv") if str(path).lower().endswith(".csv") else cls()

    @classmethod
    def with_columns(cls, columns: t.Sequence[str]) -> "EdgeFormat":
        """A csv format naming its u, v and timestamp columns in that order."""
        names = [c.strip() for c in columns]
        if len(names) != 3 or not all(names):
            raise ConfigError(f"csv columns must name u, v and timestamp, got {list(columns)}")
        return cls("csv", *names)


class ParsedEdges(t.NamedTuple):
    events: t.List[TemporalEdgeEvent]
    self_loops: int


def _as_ids(fields: t.Sequence[str], lineno: int) -> t.Tuple[int, int, int]:
    try:
        u, v, ts = (int(f) for f in fields)
    except ValueError:
        raise ParseError(f"expected integers 'u v t', got {list(fields)}", lineno)
    if u < 0 or v < 0:
        raise ParseError(f"node ids must be nonnegative, got {u} {v}", lineno)
    return u, v, ts


def _text_rows(lines: t.Iterable[str]) -> t.Iterator[t.Tuple[int, t.List[str]]]:
    for lineno, line in enumerate(lines, start=1):
        fields = line.split("#", 1)[0].split()
        if not fields:
            continue
        if len(fields) != 3:
            raise ParseError(f"expected 'u v t', got {len(fields)} field(s)", lineno)
        yield lineno, fields


def _csv_rows(lines: t.Iterable[str], fmt: EdgeFormat) -> t.Iterator[t.Tuple[int, t.List[str]]]:
    content = ((n, line) for n, line in enumerate(lines, start=1) if line.split("#", 1)[0].strip())
    positions: t.Optional[t.List[int]] = None
    for lineno, line in content:
        row = next(csv.reader([line.split("#", 1)[0]], delimiter=fmt.delimiter))
        row = [f.strip() for f in row]
        if positions is None:
            missing = [c for c in fmt.columns if c not in row]
            if missing:
                raise ParseError(f"header lacks column(s) {missing}", lineno)
            positions = [row.index(c) for c in fmt.columns]
            continue
        if len(row) <= max(positions):
            raise ParseError(f"expected at least {max(positions) + 1} columns, got {len(row)}", lineno)
        yield lineno, [row[p] for p in positions]


def parse_temporal_edges(lines: t.Iterable[str], fmt: t.Optional[EdgeFormat] = None) -> ParsedEdges:
    fmt = fmt or EdgeFormat()
    rows = _text_rows(lines) if fmt.kind == "text" else _csv_rows(lines, fmt)
    events: t.List[TemporalEdgeEvent] = []
    self_loops = 0
    for lineno, fields in rows:
        u, v, ts = _as_ids(fields, lineno)
        if u == v:
            self_loops += 1
            continue
        a, b = edge_key(u, v)
        events.append(TemporalEdgeEvent(a, b, ts))
    if self_loops:
        logger.warning(f"dropped self-loop events {self_loops=}")
    if not events:
        raise EmptyInput("no edge events in input")
    events.sort(key=lambda e: e.timestamp)
    return ParsedEdges(events, self_loops)


def read_temporal_edges(path: t.Union[str, Path], fmt: t.Optional[EdgeFormat] = None) -> ParsedEdges:
    try:
        with open(path) as f:
            return parse_temporal_edges(f, fmt or EdgeFormat.for_path(path))
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}")


class WindowSeries:
    records: t.List[MetricsRecord]

    def __init__(
        self,
        window_length: int,
        mode: str,
        tracked: t.Sequence[NodeId],
        origin: int,
    ) -> None:
        self.window_length = window_length
        self.mode = mode
        self.tracked = list(tracked)
        self.origin = origin
        self.records = []
        self.final_degrees: t.Any = np.zeros(0, dtype=np.int64)
        self.final_triangles: t.Any = np.zeros(0, dtype=np.int64)

    def degree_series(self, i: NodeId) -> t.List[int]:
        return [r.tracked[i].degree for r in self.records]

    def triangle_series(self, i: NodeId) -> t.List[int]:
        return [r.tracked[i].triangles for r in self.records]

    def frame(self) -> pd.DataFrame:
        rows = []
        for r in self.records:
            row: t.Dict[str, t.Any] = {
                "t": r.t,
                "n_active_edges": r.n_edges,
                "avg_clustering": r.avg_clustering,
                "delta": r.increment,
                "total_triangles": r.total_triangles,
            }
            for i in self.tracked:
                row[f"k_{i}"] = r.tracked[i].degree
                row[f"tri_{i}"] = r.tracked[i].triangles
            rows.append(row)
        return pd.DataFrame(rows)


def _window_degrees(
    events: t.Sequence[TemporalEdgeEvent], index: t.Dict[NodeId, int], size: int
) -> t.Any:
    counts = pipe(events, map(lambda e: (e.u, e.v)), concat, frequencies)
    degrees = np.zeros(size, dtype=np.int64)
    for raw, c in counts.items():
        degrees[index[raw]] = c
    return degrees


def snapshot_series(
    events: t.Sequence[TemporalEdgeEvent],
    window_length: int,
    mode: str = "cumulative",
    tracked: t.Sequence[NodeId] = (),
    degree_mode: str = "simple",
) -> WindowSeries:
    """Clustering, triangle and tracked-node series over contiguous time windows.

    Every node ever seen is present in every window; triangles always count on the
    deduplicated simple graph.
    """
    if window_length <= 0:
        raise ConfigError(f"window length must be positive, got {window_length}")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if degree_mode not in DEGREE_MODES:
        raise ConfigError(f"degree mode must be one of {DEGREE_MODES}, got {degree_mode!r}")
    if not events:
        raise EmptyInput("no edge events to window")

    raw_ids = sorted(pipe(events, map(lambda e: (e.u, e.v)), concat, unique))
    index = {raw: dense for dense, raw in enumerate(raw_ids, start=1)}
    unseen = [i for i in tracked if i not in index]
    if unseen:
        logger.warning(f"tracked nodes never seen in the stream {unseen=}")
    origin = min(e.timestamp for e in events)
    by_window = groupby(lambda e: (e.timestamp - origin) // window_length, events)
    n_windows = max(by_window) + 1
    size = len(raw_ids) + 1

    series = WindowSeries(window_length, mode, tracked, origin)
    g = Graph.from_edges([], nodes=index.values())
    multiplicity = np.zeros(size, dtype=np.int64)
    for w in range(n_windows):
        window = by_window.get(w, [])
        if mode == "per_window":
            g = Graph.from_edges([], nodes=index.values())
            multiplicity = np.zeros(size, dtype=np.int64)
        edges: t.List[Edge] = pipe(window, map(lambda e: (index[e.u], index[e.v])), unique, list)
        for u, v in edges:
            if not g.has_edge(u, v):
                g.add_edge(u, v)
        g.drain_touched()
        multiplicity = multiplicity + _window_degrees(window, index, size)
        degrees = multiplicity if degree_mode == "multiplicity" else g.degree[:size]

        def state(raw: NodeId) -> TrackedState:
            if raw not in index:
                return ABSENT
            i = index[raw]
            return TrackedState(int(degrees[i]), int(g.triangles[i]), g.clustering_coefficient(i))

        rec = MetricsRecord(
            t=w,
            n_nodes=len(g),
            n_edges=g.n_edges,
            avg_clustering=avg_clustering(g),
            total_triangles=total_triangles(g),
            tracked={i: state(i) for i in tracked},
        )
        if series.records:
            series.records[-1].increment = series.records[-1].avg_clustering - rec.avg_clustering
        series.records.append(rec)

    ids = np.arange(1, size)
    series.final_degrees = np.asarray(degrees)[ids]
    series.final_triangles = g.triangles[ids]
    logger.info(f"windows={n_windows} nodes={len(raw_ids)} events={len(events)} {mode=}")
    return series


def synthetic_events(config: EvolutionConfig) -> t.List[TemporalEdgeEvent]:
    """Edge stream of a growth-only evolution: G_0 at time 0, step t's edges at t+1."""
    if config.deletion != "none":
        raise ConfigError("synthetic event streams need deletion=none")
    evolution = Evolution(config)
    events = [TemporalEdgeEvent(u, v, 0) for u, v in evolution.graph.edges()]
    for _ in range(config.steps):
        report = evolution.advance()
        events.extend(TemporalEdgeEvent(*edge_key(report.new_node, j), report.t + 1) for j in report.targets)
    return events
