"""Graph-level statistics, increment bounds and one-step increment probabilities."""
import enum
import math
import typing as t
from logging import getLogger

import numpy as np

from .attachment import (
    AttachmentParams,
    ProbabilityVector,
    WeightIndex,
    attachment_distribution,
    pair_matrix,
    pair_probability,
    sample_targets,
)
from .config import BOUND_ATOL, ENUMERATION_LIMIT
from .entities import NodeId, MetricsRecord, StepReport
from .errors import (
    EmptyGraph,
    InternalInconsistency,
    DegenerateProbability,
    ModelPreconditionError,
)
from .graph import Graph

if t.TYPE_CHECKING:
    from .evolution import Trajectory

logger = getLogger(__name__)


class BoundEnvelope(t.NamedTuple):
    lower: float
    upper: float

    def contains(self, x: float, atol: float = 0.0) -> bool:
        return self.lower - atol <= x <= self.upper + atol


def avg_clustering(g: Graph) -> float:
    if len(g) == 0:
        raise EmptyGraph("average clustering of an empty graph")
    return float(np.mean(g.clustering_values(g.node_ids())))


def increment_bounds(v0_size: int, t: int) -> BoundEnvelope:
    n = v0_size + t + 1
    return BoundEnvelope(-3.0 / n, (7.0 / 3.0) / n)


def total_triangles(g: Graph) -> int:
    total, rest = divmod(g.triangle_sum, 3)
    if rest:
        raise InternalInconsistency(f"per-node triangle sum {g.triangle_sum} is not divisible by 3")
    return total


def bound_violations(records: t.Sequence[MetricsRecord], v0_size: int) -> t.List[int]:
    violations = []
    for rec in records:
        if rec.increment is None:
            continue
        if not increment_bounds(v0_size, rec.t).contains(rec.increment, BOUND_ATOL):
            violations.append(rec.t)
    return violations


def bound_slack_hits(records: t.Sequence[MetricsRecord], v0_size: int) -> t.List[int]:
    """Steps whose increment is outside the exact envelope but within BOUND_ATOL of it."""
    hits = []
    for rec in records:
        if rec.increment is None:
            continue
        envelope = increment_bounds(v0_size, rec.t)
        if not envelope.contains(rec.increment) and envelope.contains(rec.increment, BOUND_ATOL):
            hits.append(rec.t)
    return hits


class IncrementCase(enum.Enum):
    APART_BOTH_LOW = "apart_both_low"
    APART_ONE_LOW = "apart_one_low"
    APART_BOTH_HIGH = "apart_both_high"
    ADJACENT_BOTH_LOW = "adjacent_both_low"
    ADJACENT_ONE_LOW = "adjacent_one_low"
    ADJACENT_BOTH_HIGH = "adjacent_both_high"


# envelope numerators, divided by ||V_0|| + t + 1
_CASE_ENVELOPES = {
    IncrementCase.APART_BOTH_LOW: (0.0, 1.0),
    IncrementCase.APART_ONE_LOW: (0.0, 5.0 / 3.0),
    IncrementCase.APART_BOTH_HIGH: (0.0, 7.0 / 3.0),
    IncrementCase.ADJACENT_BOTH_LOW: (-3.0, -2.0),
    IncrementCase.ADJACENT_ONE_LOW: (-7.0 / 3.0, -1.0 / 3.0),
    IncrementCase.ADJACENT_BOTH_HIGH: (-5.0 / 3.0, 4.0 / 3.0),
}


def classify_increment(report: StepReport) -> IncrementCase:
    if len(report.targets) != 2:
        raise ValueError(f"case analysis covers two targets, got {len(report.targets)}")
    high = sum(1 for k in report.target_degrees if k >= 2)
    if report.targets_adjacent:
        return [
            IncrementCase.ADJACENT_BOTH_LOW,
            IncrementCase.ADJACENT_ONE_LOW,
            IncrementCase.ADJACENT_BOTH_HIGH,
        ][high]
    return [
        IncrementCase.APART_BOTH_LOW,
        IncrementCase.APART_ONE_LOW,
        IncrementCase.APART_BOTH_HIGH,
    ][high]


def case_envelope(case: IncrementCase, v0_size: int, t: int) -> BoundEnvelope:
    lo, hi = _CASE_ENVELOPES[case]
    n = v0_size + t + 1
    return BoundEnvelope(lo / n, hi / n)


def updated_clustering(k: int, c: float, adjacent: bool) -> float:
    """Clustering of an attachment target after one new node joins it (two targets)."""
    if adjacent:
        if k <= 1:
            return 1.0 if k == 1 else 0.0
        return (k - 1) / (k + 1) * c + 2 / (k * (k + 1))
    if k <= 1:
        return 0.0
    return (k - 1) / (k + 1) * c


class TailCounts(t.NamedTuple):
    n_nodes: int
    degree_above_min: int
    triangle_positive: int
    isolated: int


def tail_counts(g: Graph, k_min: int) -> TailCounts:
    ids = g.node_ids()
    k = g.degree[ids]
    tri = g.triangles[ids]
    return TailCounts(
        n_nodes=len(ids),
        degree_above_min=int(np.count_nonzero(k > k_min)),
        triangle_positive=int(np.count_nonzero(tri > 0)),
        isolated=int(np.count_nonzero(k == 0)),
    )


def _odds(dist: ProbabilityVector) -> t.Any:
    p = dist.probs
    if np.any(p >= 1.0):
        raise DegenerateProbability("a node carries all the attachment mass")
    return p / (1.0 - p)


def degree_increment_probability(dist: ProbabilityVector, i: NodeId) -> float:
    odds = _odds(dist)
    pos = dist.position(i)
    others = math.fsum(odds) - odds[pos]
    return float(dist.probs[pos] * (1.0 + others))


def degree_increment_probabilities(dist: ProbabilityVector) -> t.Any:
    odds = _odds(dist)
    return dist.probs * (1.0 + math.fsum(odds) - odds)


def triangle_increment_probability(g: Graph, dist: ProbabilityVector, i: NodeId) -> float:
    return math.fsum(pair_probability(dist, i, j) for j in sorted(g.neighbors(i)))


def triangle_increment_probabilities(g: Graph, dist: ProbabilityVector) -> t.Any:
    odds = _odds(dist)
    p = dist.probs
    out = np.zeros(len(dist), dtype=np.float64)
    for pos, i in enumerate(dist.ids):
        nbrs = [dist.position(j) for j in g.adjacency[int(i)]]
        if nbrs:
            out[pos] = p[pos] * odds[nbrs].sum() + odds[pos] * p[nbrs].sum()
    return out


class EnumeratedIncrements(t.NamedTuple):
    degree: t.Any
    triangle: t.Any
    closes_triangle: float


def enumerate_increments(g: Graph, dist: ProbabilityVector) -> EnumeratedIncrements:
    """Increment probabilities by summing the law of every unordered pair."""
    m = pair_matrix(dist)
    n = len(dist)
    adj = np.zeros((n, n), dtype=bool)
    for pos, i in enumerate(dist.ids):
        for j in g.adjacency[int(i)]:
            adj[pos, dist.position(j)] = True
    on_edges = np.where(adj, m, 0.0)
    return EnumeratedIncrements(
        degree=m.sum(axis=1),
        triangle=on_edges.sum(axis=1),
        closes_triangle=float(on_edges.sum() / 2.0),
    )


def expected_triangle_increment(g: Graph, dist: ProbabilityVector) -> float:
    """E[total triangles at s+1] - total at s, given G_s (two targets).

    Each existing node gains p2_i/3 in expectation; the new node closes a triangle
    exactly when its targets are adjacent, adding a third of that event.
    """
    p2 = triangle_increment_probabilities(g, dist)
    closes = p2.sum() / 2.0
    return float(p2.sum() / 3.0 + closes / 3.0)


class SubmartingaleReport:
    def __init__(self) -> None:
        self.steps: t.List[int] = []
        self.skipped: t.List[int] = []
        self.enumerated = 0
        self.max_degree_discrepancy = 0.0
        self.max_triangle_discrepancy = 0.0
        self.max_total_discrepancy = 0.0
        self.max_degree_sum_error = 0.0
        self.min_degree_increment = math.inf
        self.min_triangle_increment = math.inf
        self.min_total_increment = math.inf
        self.max_degree_z = 0.0
        self.max_triangle_z = 0.0

    @property
    def max_discrepancy(self) -> float:
        return max(
            self.max_degree_discrepancy,
            self.max_triangle_discrepancy,
            self.max_total_discrepancy,
        )

    @property
    def ok(self) -> bool:
        return (
            self.min_degree_increment >= 0
            and self.min_triangle_increment >= 0
            and self.min_total_increment >= 0
        )

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "steps": self.steps,
            "skipped": self.skipped,
            "enumerated": self.enumerated,
            "max_degree_discrepancy": self.max_degree_discrepancy,
            "max_triangle_discrepancy": self.max_triangle_discrepancy,
            "max_total_discrepancy": self.max_total_discrepancy,
            "max_degree_sum_error": self.max_degree_sum_error,
            "min_degree_increment": self.min_degree_increment,
            "min_triangle_increment": self.min_triangle_increment,
            "min_total_increment": self.min_total_increment,
            "max_degree_z": self.max_degree_z,
            "max_triangle_z": self.max_triangle_z,
            "ok": self.ok,
        }


class ReplayMeans(t.NamedTuple):
    degree: t.Any
    triangle: t.Any


def replay_increments(
    g: Graph,
    params: AttachmentParams,
    m0: int,
    replays: int,
    rng: np.random.Generator,
) -> ReplayMeans:
    """Mean one-step increments of k_i and Delta_i over repeated target draws from ``g``.

    Only targets gain degree or triangles: a target gains one triangle per other
    target it is adjacent to.
    """
    index = WeightIndex.for_graph(g, params)
    size = g.next_id
    dk = np.zeros(size, dtype=np.int64)
    dtri = np.zeros(size, dtype=np.int64)
    for _ in range(replays):
        targets = sample_targets(g, params, m0, rng, index)
        for a in targets:
            dk[a] += 1
            nbrs = g.adjacency[a]
            dtri[a] += sum(1 for b in targets if b in nbrs)
    return ReplayMeans(dk / replays, dtri / replays)


def _z(mean: t.Any, p: t.Any, replays: int) -> float:
    sigma = np.sqrt(p * (1.0 - p) / replays)
    diff = np.abs(mean - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, diff / np.where(sigma > 0, sigma, 1.0), np.where(diff > 0, np.inf, 0.0))
    return float(z.max()) if len(z) else 0.0


def check_state(
    g: Graph,
    params: AttachmentParams,
    m0: int,
    replays: int,
    rng: np.random.Generator,
    report: SubmartingaleReport,
) -> None:
    dist = attachment_distribution(g, params)
    ids = dist.ids
    if replays > 0:
        means = replay_increments(g, params, m0, replays, rng)
        mc_degree, mc_triangle = means.degree[ids], means.triangle[ids]
    if m0 != 2:
        # no closed form beyond two targets; nonnegativity from the replays only
        if replays > 0:
            report.min_degree_increment = min(report.min_degree_increment, float(mc_degree.min()))
            report.min_triangle_increment = min(report.min_triangle_increment, float(mc_triangle.min()))
        return
    p1 = degree_increment_probabilities(dist)
    p2 = triangle_increment_probabilities(g, dist)
    total = expected_triangle_increment(g, dist)
    report.min_degree_increment = min(report.min_degree_increment, float(p1.min()))
    report.min_triangle_increment = min(report.min_triangle_increment, float(p2.min()))
    report.min_total_increment = min(report.min_total_increment, total)
    report.max_degree_sum_error = max(report.max_degree_sum_error, abs(math.fsum(p1) - 2.0))
    if len(dist) <= ENUMERATION_LIMIT:
        enumerated = enumerate_increments(g, dist)
        report.enumerated += 1
        report.max_degree_discrepancy = max(
            report.max_degree_discrepancy, float(np.abs(enumerated.degree - p1).max())
        )
        report.max_triangle_discrepancy = max(
            report.max_triangle_discrepancy, float(np.abs(enumerated.triangle - p2).max())
        )
        exact_total = enumerated.triangle.sum() / 3.0 + enumerated.closes_triangle / 3.0
        report.max_total_discrepancy = max(report.max_total_discrepancy, abs(exact_total - total))
    if replays > 0:
        report.max_degree_z = max(report.max_degree_z, _z(mc_degree, p1, replays))
        report.max_triangle_z = max(report.max_triangle_z, _z(mc_triangle, p2, replays))


def submartingale_check(
    trajectory: "Trajectory",
    replays: int,
    samples: int = 5,
    seed: int = 0,
) -> SubmartingaleReport:
    """Check the one-step increment laws of k_i, Delta_i and the total at sampled states.

    States are rebuilt by replaying the trajectory's config, which is deterministic.
    """
    config = trajectory.config
    last = len(trajectory.records) - 1
    steps = sorted({int(s) for s in np.linspace(0, last, num=max(samples, 1))})
    report = SubmartingaleReport()
    rng = np.random.default_rng(seed)
    for s, g in trajectory.states(steps).items():
        try:
            check_state(g, config.params, config.m0, replays, rng, report)
        except (ModelPreconditionError, DegenerateProbability) as e:
            logger.info(f"skip state {s}: {e}")
            report.skipped.append(s)
            continue
        report.steps.append(s)
    logger.info(f"submartingale check {report.as_dict()}")
    return report
