"""Clustering-attachment weights and weighted sampling without replacement."""
import math
import typing as t
from logging import getLogger

import numpy as np

from .config import WEIGHT_RTOL
from .entities import NodeId
from .errors import (
    ConfigError,
    AllWeightsZero,
    InsufficientEligibleNodes,
    DegenerateProbability,
    UnknownNode,
)
from .graph import Graph

logger = getLogger(__name__)

Family = t.Literal["ca", "lpa"]
FAMILIES = ("ca", "lpa")


class AttachmentParams:
    def __init__(self, alpha: float = 1.0, epsilon: float = 0.0, family: str = "ca") -> None:
        family = family.lower()
        if family not in FAMILIES:
            raise ConfigError(f"attachment family must be one of {FAMILIES}, got {family!r}")
        if alpha < 0 or epsilon < 0:
            raise ConfigError(f"alpha and epsilon must be nonnegative, got {alpha=} {epsilon=}")
        self.alpha = float(alpha)
        self.epsilon = float(epsilon)
        self.family = family

    def __repr__(self) -> str:
        return f"AttachmentParams(alpha={self.alpha}, epsilon={self.epsilon}, family={self.family!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AttachmentParams) and (
            (self.alpha, self.epsilon, self.family)
            == (other.alpha, other.epsilon, other.family)
        )


def ca_weight(g: Graph, i: NodeId, params: AttachmentParams) -> float:
    c = g.clustering_coefficient(i)
    if params.family == "lpa":
        return float(g.degree[i])
    if params.alpha > 0:
        return c ** params.alpha + params.epsilon
    # 0^0 = 0: the alpha -> 0 limit keeps only nodes with positive clustering
    return (1.0 if c > 0 else 0.0) + params.epsilon


class ProbabilityVector:
    """Normalized attachment probabilities over the nodes of one graph state."""

    def __init__(self, ids: t.Sequence[NodeId], probs: t.Any) -> None:
        self.ids = np.asarray(ids, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=np.float64)
        self._pos = {int(u): i for i, u in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, i: NodeId) -> float:
        return float(self.probs[self.position(i)])

    def position(self, i: NodeId) -> int:
        try:
            return self._pos[i]
        except KeyError:
            raise UnknownNode(f"node {i} has no attachment probability")

    def support(self) -> t.List[NodeId]:
        return [int(u) for u in self.ids[self.probs > 0]]

    @classmethod
    def from_weights(cls, ids: t.Sequence[NodeId], weights: t.Sequence[float]) -> "ProbabilityVector":
        w = np.asarray(weights, dtype=np.float64)
        total = math.fsum(w)
        if total <= 0:
            raise AllWeightsZero("every attachment weight is zero")
        return cls(ids, w / total)


def attachment_distribution(g: Graph, params: AttachmentParams) -> ProbabilityVector:
    ids = g.nodes()
    return ProbabilityVector.from_weights(ids, [ca_weight(g, i, params) for i in ids])


def pair_probability(dist: ProbabilityVector, i: NodeId, j: NodeId) -> float:
    if i == j:
        raise DegenerateProbability(f"pair needs two distinct nodes, got {i} twice")
    pi, pj = dist[i], dist[j]
    if pi >= 1.0 or pj >= 1.0:
        raise DegenerateProbability(f"P({i})={pi}, P({j})={pj}: a certain draw has no pair law")
    return pi * pj * (2.0 - pi - pj) / ((1.0 - pi) * (1.0 - pj))


def pair_matrix(dist: ProbabilityVector) -> t.Any:
    """All pair probabilities at once, indexed by positions in ``dist.ids``."""
    p = dist.probs
    if np.any(p >= 1.0):
        raise DegenerateProbability("a node carries all the attachment mass")
    ratio = p / (1.0 - p)
    m = np.outer(p, ratio)
    m = m + m.T
    np.fill_diagonal(m, 0.0)
    return m


class WeightIndex:
    """Per-node weights in a binary indexed tree: O(log n) draws and point updates.

    Slots are node ids; slot ``s`` lives at tree position ``s + 1``.
    """

    def __init__(self, weights: t.Sequence[float]) -> None:
        self.rebuild(weights)

    @classmethod
    def for_graph(cls, g: Graph, params: AttachmentParams) -> "WeightIndex":
        return cls(graph_weights(g, params))

    def __len__(self) -> int:
        return self._size

    def rebuild(self, weights: t.Sequence[float]) -> None:
        w = np.asarray(weights, dtype=np.float64)
        n = len(w)
        cs = np.concatenate([[0.0], np.cumsum(w)])
        idx = np.arange(1, n + 1)
        tree = cs[idx] - cs[idx - (idx & -idx)]
        self._size = n
        self._tree: t.List[float] = [0.0] + tree.tolist()
        self._weights: t.List[float] = w.tolist()
        self._top = 1 << (n.bit_length() - 1) if n else 0
        self.total = math.fsum(self._weights)
        self.positive = int(np.count_nonzero(w > 0))

    def weight(self, slot: int) -> float:
        return self._weights[slot] if slot < self._size else 0.0

    def weights(self) -> t.List[float]:
        return list(self._weights)

    def update(self, slot: int, weight: float) -> None:
        if slot >= self._size:
            self._grow(slot + 1)
        old = self._weights[slot]
        if old == weight:
            return
        self._weights[slot] = weight
        self.positive += (weight > 0) - (old > 0)
        delta = weight - old
        self.total += delta
        i = slot + 1
        tree = self._tree
        size = self._size
        while i <= size:
            tree[i] += delta
            i += i & -i

    def prefix(self, slot: int) -> float:
        """Sum of weights of slots < slot."""
        s = 0.0
        i = min(slot, self._size)
        tree = self._tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def draw(self, u: float) -> int:
        """Slot whose cumulative weight interval contains ``u`` times the total."""
        target = u * self.prefix(self._size)
        pos = 0
        step = self._top
        tree = self._tree
        size = self._size
        while step:
            nxt = pos + step
            if nxt <= size and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        if pos >= size or self._weights[pos] <= 0:
            pos = self._nearest_positive(min(pos, size - 1))
        return pos

    def drift(self) -> float:
        exact = math.fsum(self._weights)
        if exact == 0:
            return abs(self.total)
        return abs(self.total - exact) / exact

    def _nearest_positive(self, slot: int) -> int:
        for s in range(slot, -1, -1):
            if self._weights[s] > 0:
                return s
        for s in range(slot + 1, self._size):
            if self._weights[s] > 0:
                return s
        raise AllWeightsZero("every attachment weight is zero")

    def _grow(self, size: int) -> None:
        grown = max(size, 2 * self._size, 16)
        self.rebuild(self._weights + [0.0] * (grown - self._size))


def graph_weights(g: Graph, params: AttachmentParams) -> t.List[float]:
    weights = [0.0] * max(g.next_id, 1)
    for i in g.adjacency:
        weights[i] = ca_weight(g, i, params)
    return weights


def refresh_weights(index: WeightIndex, g: Graph, nodes: t.Iterable[NodeId], params: AttachmentParams) -> None:
    for u in nodes:
        index.update(u, ca_weight(g, u, params) if u in g else 0.0)


def check_index(index: WeightIndex, g: Graph, params: AttachmentParams) -> bool:
    exact = math.fsum(ca_weight(g, i, params) for i in g.adjacency)
    if exact == 0:
        return index.total == 0
    return abs(index.total - exact) <= WEIGHT_RTOL * exact


def sample_targets(
    g: Graph,
    params: AttachmentParams,
    m0: int,
    rng: np.random.Generator,
    index: t.Optional[WeightIndex] = None,
) -> t.List[NodeId]:
    """Draw ``m0`` distinct nodes one at a time, each proportional to the current weights.

    A drawn node's weight is zeroed for the remaining draws and restored afterwards,
    so ``index`` is left exactly as it was.
    """
    if index is None:
        index = WeightIndex.for_graph(g, params)
    if index.positive < m0:
        raise InsufficientEligibleNodes(
            f"{index.positive} node(s) with positive weight, need {m0}"
        )
    chosen: t.List[NodeId] = []
    saved: t.List[float] = []
    try:
        for _ in range(m0):
            slot = index.draw(float(rng.random()))
            chosen.append(slot)
            saved.append(index.weight(slot))
            index.update(slot, 0.0)
    finally:
        for slot, w in zip(chosen, saved):
            index.update(slot, w)
    return chosen
