"""Dynamic undirected simple graph with incrementally maintained triangle counts.

Degrees and per-node triangle counts live in numpy arrays indexed by node id, so
graph-level statistics are vectorized while single mutations stay O(min degree).
"""
import typing as t
from itertools import combinations

import numpy as np

from .entities import NodeId, Edge, EdgeReport, edge_key
from .errors import (
    UnknownNode,
    DuplicateNode,
    SelfLoop,
    DuplicateEdge,
    UnknownEdge,
)


class Graph:
    adjacency: t.Dict[NodeId, t.Set[NodeId]]
    degree: t.Any
    triangles: t.Any
    alive: t.Any

    def __init__(self, capacity: int = 16) -> None:
        self.adjacency = {}
        self.degree = np.zeros(capacity, dtype=np.int64)
        self.triangles = np.zeros(capacity, dtype=np.int64)
        self.alive = np.zeros(capacity, dtype=bool)
        self.next_id = 1
        self.touched: t.Set[NodeId] = set()
        self.retired: t.Set[NodeId] = set()
        self._node_list: t.List[NodeId] = []
        self._node_pos: t.Dict[NodeId, int] = {}
        self._edge_list: t.List[Edge] = []
        self._edge_pos: t.Dict[Edge, int] = {}
        self._triangle_sum = 0

    @classmethod
    def from_edges(
        cls, edges: t.Iterable[Edge], nodes: t.Iterable[NodeId] = ()
    ) -> "Graph":
        g = cls()
        for u in nodes:
            if u not in g:
                g.add_node(u)
        for u, v in edges:
            for w in (u, v):
                if w not in g:
                    g.add_node(w)
            g.add_edge(u, v)
        g.touched.clear()
        return g

    def __len__(self) -> int:
        return len(self._node_list)

    def __contains__(self, u: object) -> bool:
        return u in self.adjacency

    @property
    def n_edges(self) -> int:
        return len(self._edge_list)

    @property
    def triangle_sum(self) -> int:
        return self._triangle_sum

    def nodes(self) -> t.List[NodeId]:
        return sorted(self.adjacency)

    def node_ids(self) -> t.Any:
        return np.flatnonzero(self.alive[: self.next_id])

    def edges(self) -> t.List[Edge]:
        return sorted(self._edge_list)

    def node_at(self, position: int) -> NodeId:
        return self._node_list[position]

    def edge_at(self, position: int) -> Edge:
        return self._edge_list[position]

    def neighbors(self, u: NodeId) -> t.Set[NodeId]:
        self._check(u)
        return self.adjacency[u]

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return edge_key(u, v) in self._edge_pos

    def add_node(self, u: t.Optional[NodeId] = None) -> NodeId:
        if u is None:
            u = self.next_id
        elif u < 0:
            raise UnknownNode(f"node ids are nonnegative, got {u}")
        elif u in self.adjacency or u in self.retired:
            raise DuplicateNode(f"node {u} exists or was retired")
        self._ensure(u)
        self.adjacency[u] = set()
        self.alive[u] = True
        self._node_pos[u] = len(self._node_list)
        self._node_list.append(u)
        self.next_id = max(self.next_id, u + 1)
        self.touched.add(u)
        return u

    def add_edge(self, u: NodeId, v: NodeId) -> EdgeReport:
        self._check(u)
        self._check(v)
        if u == v:
            raise SelfLoop(f"self-loop at node {u}")
        key = edge_key(u, v)
        if key in self._edge_pos:
            raise DuplicateEdge(f"edge {key} already present")
        common = self._common(u, v)
        for w in common:
            self.triangles[w] += 1
        n = len(common)
        self.triangles[u] += n
        self.triangles[v] += n
        self.degree[u] += 1
        self.degree[v] += 1
        self.adjacency[u].add(v)
        self.adjacency[v].add(u)
        self._edge_pos[key] = len(self._edge_list)
        self._edge_list.append(key)
        self._triangle_sum += 3 * n
        self.touched.update(common)
        self.touched.add(u)
        self.touched.add(v)
        return EdgeReport(u, v, n)

    def remove_edge(self, u: NodeId, v: NodeId) -> EdgeReport:
        key = edge_key(u, v)
        if key not in self._edge_pos:
            raise UnknownEdge(f"edge {key} not present")
        self.adjacency[u].discard(v)
        self.adjacency[v].discard(u)
        common = self._common(u, v)
        for w in common:
            self.triangles[w] -= 1
        n = len(common)
        self.triangles[u] -= n
        self.triangles[v] -= n
        self.degree[u] -= 1
        self.degree[v] -= 1
        _swap_remove(self._edge_list, self._edge_pos, key)
        self._triangle_sum -= 3 * n
        self.touched.update(common)
        self.touched.add(u)
        self.touched.add(v)
        return EdgeReport(u, v, n)

    def remove_node(self, u: NodeId) -> int:
        self._check(u)
        removed = 0
        for v in sorted(self.adjacency[u]):
            self.remove_edge(u, v)
            removed += 1
        del self.adjacency[u]
        self.alive[u] = False
        self.retired.add(u)
        self.touched.add(u)
        _swap_remove(self._node_list, self._node_pos, u)
        return removed

    def clustering_coefficient(self, i: NodeId) -> float:
        self._check(i)
        k = int(self.degree[i])
        if k <= 1:
            return 0.0
        return 2 * int(self.triangles[i]) / (k * (k - 1))

    def clustering_values(self, ids: t.Any) -> t.Any:
        k = self.degree[ids]
        pairs = k * (k - 1)
        c = np.zeros(len(ids), dtype=np.float64)
        mask = k >= 2
        c[mask] = 2 * self.triangles[ids][mask] / pairs[mask]
        return c

    def triangle_count_bruteforce(self, i: NodeId) -> int:
        self._check(i)
        nbrs = sorted(self.adjacency[i])
        return sum(1 for a, b in combinations(nbrs, 2) if b in self.adjacency[a])

    def drain_touched(self) -> t.List[NodeId]:
        touched = sorted(self.touched)
        self.touched.clear()
        return touched

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.adjacency = {u: set(nbrs) for u, nbrs in self.adjacency.items()}
        g.degree = self.degree.copy()
        g.triangles = self.triangles.copy()
        g.alive = self.alive.copy()
        g.next_id = self.next_id
        g.touched = set(self.touched)
        g.retired = set(self.retired)
        g._node_list = list(self._node_list)
        g._node_pos = dict(self._node_pos)
        g._edge_list = list(self._edge_list)
        g._edge_pos = dict(self._edge_pos)
        g._triangle_sum = self._triangle_sum
        return g

    def _common(self, u: NodeId, v: NodeId) -> t.List[NodeId]:
        a, b = self.adjacency[u], self.adjacency[v]
        if len(a) > len(b):
            a, b = b, a
        return [w for w in a if w in b]

    def _check(self, u: NodeId) -> None:
        if u not in self.adjacency:
            raise UnknownNode(f"node {u} not in graph")

    def _ensure(self, u: NodeId) -> None:
        size = len(self.degree)
        if u < size:
            return
        grown = max(2 * size, u + 1)
        extra = grown - size
        self.degree = np.concatenate([self.degree, np.zeros(extra, dtype=np.int64)])
        self.triangles = np.concatenate(
            [self.triangles, np.zeros(extra, dtype=np.int64)]
        )
        self.alive = np.concatenate([self.alive, np.zeros(extra, dtype=bool)])


K = t.TypeVar("K")


def _swap_remove(items: t.List[K], positions: t.Dict[K, int], item: K) -> None:
    pos = positions.pop(item)
    last = items.pop()
    if pos < len(items):
        items[pos] = last
        positions[last] = pos
