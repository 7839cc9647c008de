import typing as t

NodeId = int
Edge = t.Tuple[NodeId, NodeId]


def edge_key(u: NodeId, v: NodeId) -> Edge:
    return (u, v) if u < v else (v, u)


class EdgeReport(t.NamedTuple):
    u: NodeId
    v: NodeId
    common: int


class TrackedState(t.NamedTuple):
    degree: int
    triangles: int
    clustering: float


ABSENT = TrackedState(0, 0, 0.0)


class MetricsRecord:
    t: int
    n_nodes: int
    n_edges: int
    avg_clustering: float
    increment: t.Optional[float]
    total_triangles: int
    tracked: t.Dict[NodeId, TrackedState]

    def __init__(
        self,
        t: int,
        n_nodes: int,
        n_edges: int,
        avg_clustering: float,
        total_triangles: int,
        tracked: t.Dict[NodeId, TrackedState],
        increment: t.Optional[float] = None,
    ) -> None:
        self.t = t
        self.n_nodes = n_nodes
        self.n_edges = n_edges
        self.avg_clustering = avg_clustering
        self.total_triangles = total_triangles
        self.tracked = tracked
        self.increment = increment

    def __repr__(self) -> str:
        return (
            f"MetricsRecord(t={self.t}, n_nodes={self.n_nodes}, n_edges={self.n_edges}, "
            f"avg_clustering={self.avg_clustering!r}, increment={self.increment!r}, "
            f"total_triangles={self.total_triangles})"
        )

    def row(self) -> t.Dict[str, t.Any]:
        row: t.Dict[str, t.Any] = {
            "t": self.t,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "avg_clustering": self.avg_clustering,
            "delta": self.increment,
            "total_triangles": self.total_triangles,
        }
        for node, state in self.tracked.items():
            row[f"k_{node}"] = state.degree
            row[f"tri_{node}"] = state.triangles
            row[f"c_{node}"] = state.clustering
        return row


class TemporalEdgeEvent(t.NamedTuple):
    u: NodeId
    v: NodeId
    timestamp: int


class EstimatorResult(t.NamedTuple):
    estimator: str
    k: int
    n: int
    gamma: float
    valid: bool
    s: t.Optional[float] = None
    reason: t.Optional[str] = None


class StepReport(t.NamedTuple):
    t: int
    new_node: NodeId
    targets: t.Tuple[NodeId, ...]
    target_degrees: t.Tuple[int, ...]
    target_clustering: t.Tuple[float, ...]
    adjacent_pairs: int
    removed_node: t.Optional[NodeId] = None
    removed_edge: t.Optional[Edge] = None

    @property
    def targets_adjacent(self) -> bool:
        return self.adjacent_pairs > 0
