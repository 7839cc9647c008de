import math
from collections import Counter
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chisquare

from ca_graphlab.attachment import (
    AttachmentParams,
    ProbabilityVector,
    WeightIndex,
    attachment_distribution,
    ca_weight,
    check_index,
    graph_weights,
    pair_matrix,
    pair_probability,
    refresh_weights,
    sample_targets,
)
from ca_graphlab.errors import (
    AllWeightsZero,
    ConfigError,
    DegenerateProbability,
    GraphLabError,
    InsufficientEligibleNodes,
    UnknownNode,
)
from ca_graphlab.evolution import init_graph
from ca_graphlab.graph import Graph
from .conftest import random_graph


def test_ca_weight() -> None:
    g = init_graph("rectangle_diag")
    assert ca_weight(g, 1, AttachmentParams(alpha=1.0, epsilon=0.0)) == pytest.approx(2 / 3)
    assert ca_weight(g, 1, AttachmentParams(alpha=2.0, epsilon=0.5)) == pytest.approx(4 / 9 + 0.5)
    assert ca_weight(g, 2, AttachmentParams(alpha=0.0, epsilon=0.0)) == 1.0
    assert ca_weight(g, 1, AttachmentParams(family="lpa")) == 3.0
    rectangle = init_graph("rectangle")
    assert ca_weight(rectangle, 1, AttachmentParams(alpha=0.0, epsilon=0.0)) == 0.0
    assert ca_weight(rectangle, 1, AttachmentParams(alpha=0.0, epsilon=1.0)) == 1.0


def test_params_validation() -> None:
    with pytest.raises(ConfigError):
        AttachmentParams(alpha=-1.0)
    with pytest.raises(ConfigError):
        AttachmentParams(family="ba")
    assert AttachmentParams(1.0, 1.0) == AttachmentParams(1.0, 1.0, "CA")


def test_attachment_distribution() -> None:
    dist = attachment_distribution(init_graph("rectangle"), AttachmentParams(alpha=3.0, epsilon=0.1))
    assert list(dist.probs) == pytest.approx([0.25] * 4)
    with pytest.raises(AllWeightsZero):
        attachment_distribution(init_graph("rectangle"), AttachmentParams(epsilon=0.0))
    dist = attachment_distribution(init_graph("rectangle_diag"), AttachmentParams())
    assert dist[2] == pytest.approx(1.0 / (2 / 3 + 1 + 2 / 3 + 1))
    assert dist.support() == [1, 2, 3, 4]


def test_pair_probability() -> None:
    dist = ProbabilityVector([1, 2, 3], [0.5, 0.3, 0.2])
    assert pair_probability(dist, 1, 2) == pytest.approx(0.5142857, abs=1e-7)
    assert pair_probability(dist, 1, 3) == pytest.approx(0.325, abs=1e-12)
    total = sum(pair_probability(dist, i, j) for i, j in combinations([1, 2, 3], 2))
    assert total == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DegenerateProbability):
        pair_probability(dist, 2, 2)
    with pytest.raises(DegenerateProbability):
        pair_probability(ProbabilityVector([1, 2], [1.0, 0.0]), 1, 2)


def test_pair_matrix_matches_pairs() -> None:
    dist = ProbabilityVector([4, 7, 9, 12], [0.1, 0.2, 0.3, 0.4])
    m = pair_matrix(dist)
    for (a, i), (b, j) in combinations(enumerate([4, 7, 9, 12]), 2):
        assert m[a, b] == pytest.approx(pair_probability(dist, i, j), abs=1e-15)
        assert m[a, b] == m[b, a]
    assert np.all(np.diag(m) == 0)


def test_pair_law_is_normalized(rng: np.random.Generator) -> None:
    checked = 0
    for _ in range(200):
        g = random_graph(rng, int(rng.integers(3, 51)), float(rng.uniform(0.05, 0.6)))
        epsilon = 0.0 if rng.random() < 0.3 else float(rng.uniform(0.0, 2.0))
        params = AttachmentParams(alpha=float(rng.uniform(0.0, 3.0)), epsilon=epsilon)
        try:
            dist = attachment_distribution(g, params)
            m = pair_matrix(dist)
        except (AllWeightsZero, DegenerateProbability):
            continue
        assert m.sum() / 2 == pytest.approx(1.0, abs=1e-10)
        if epsilon == 0.0:
            support = [dist.position(i) for i in dist.support()]
            on_support = m[np.ix_(support, support)].sum() / 2
            assert on_support == pytest.approx(1.0, abs=1e-10)
        checked += 1
    assert checked > 100


def test_weight_index_prefix_and_draw() -> None:
    weights = [0.0, 1.0, 0.0, 2.0, 0.5, 0.0, 1.5]
    index = WeightIndex(weights)
    cumulative = np.concatenate([[0.0], np.cumsum(weights)])
    for slot in range(len(weights) + 1):
        assert index.prefix(slot) == pytest.approx(cumulative[slot])
    assert index.total == pytest.approx(5.0)
    assert index.positive == 4
    assert index.draw(0.0) == 1
    assert index.draw(0.19) == 1
    assert index.draw(0.21) == 3
    assert index.draw(0.999999) == 6
    drawn = {index.draw(u) for u in np.linspace(0, 1, 1001)}
    assert drawn == {1, 3, 4, 6}


def test_weight_index_update_and_grow() -> None:
    index = WeightIndex([1.0, 1.0])
    index.update(1, 0.0)
    assert index.positive == 1
    assert index.draw(0.9) == 0
    index.update(20, 3.0)
    assert len(index) >= 21
    assert index.total == pytest.approx(4.0)
    assert index.prefix(21) == pytest.approx(4.0)
    assert index.draw(0.5) == 20
    assert index.drift() < 1e-12
    index.update(0, 0.0)
    index.update(20, 0.0)
    with pytest.raises(AllWeightsZero):
        index.draw(0.5)


def test_refresh_keeps_index_exact(rng: np.random.Generator) -> None:
    params = AttachmentParams(alpha=1.0, epsilon=0.2)
    g = random_graph(rng, 20, 0.3)
    index = WeightIndex.for_graph(g, params)
    g.drain_touched()
    for _ in range(10 ** 4):
        u, v = (int(x) for x in rng.choice(g.nodes(), size=2, replace=False))
        if g.has_edge(u, v):
            g.remove_edge(u, v)
        else:
            g.add_edge(u, v)
        refresh_weights(index, g, g.drain_touched(), params)
    assert check_index(index, g, params)
    assert index.drift() < 1e-9
    assert index.weights()[: g.next_id] == pytest.approx(graph_weights(g, params))


def test_sample_targets_distinct_and_restores(rng: np.random.Generator) -> None:
    g = init_graph("icosahedron_full")
    params = AttachmentParams(alpha=1.0, epsilon=0.0)
    index = WeightIndex.for_graph(g, params)
    before = index.weights()
    for m0 in (2, 5, 12):
        targets = sample_targets(g, params, m0, rng, index)
        assert len(set(targets)) == m0
        assert set(targets) <= set(g.nodes())
    assert index.weights() == before
    with pytest.raises(InsufficientEligibleNodes):
        sample_targets(g, params, 13, rng, index)


def test_sample_targets_needs_positive_weights(rng: np.random.Generator) -> None:
    g = Graph.from_edges([(1, 2), (2, 3), (3, 1), (3, 4)])
    params = AttachmentParams(alpha=1.0, epsilon=0.0)
    for _ in range(200):
        assert 4 not in sample_targets(g, params, 2, rng)
    with pytest.raises(InsufficientEligibleNodes):
        sample_targets(init_graph("rectangle"), params, 2, rng)


def sampled_pairs(g: Graph, params: AttachmentParams, index: WeightIndex, draws: int, rng: np.random.Generator) -> Counter:
    return Counter(tuple(sorted(sample_targets(g, params, 2, rng, index))) for _ in range(draws))


def test_triangle_pairs_are_uniform(rng: np.random.Generator) -> None:
    g = init_graph("triangle")
    params = AttachmentParams(alpha=1.0, epsilon=0.3)
    draws = 30000
    counts = sampled_pairs(g, params, WeightIndex.for_graph(g, params), draws, rng)
    assert sorted(counts) == [(1, 2), (1, 3), (2, 3)]
    sigma = math.sqrt((1 / 3) * (2 / 3) / draws)
    for n in counts.values():
        assert abs(n / draws - 1 / 3) <= 3 * sigma


def test_weighted_pairs_match_pair_probability(rng: np.random.Generator) -> None:
    g = init_graph("triangle")
    dist = ProbabilityVector([1, 2, 3], [0.5, 0.3, 0.2])
    draws = 30000
    counts = sampled_pairs(g, AttachmentParams(), WeightIndex([0.0, 0.5, 0.3, 0.2]), draws, rng)
    for i, j in combinations([1, 2, 3], 2):
        p = pair_probability(dist, i, j)
        assert abs(counts[(i, j)] / draws - p) <= 3 * math.sqrt(p * (1 - p) / draws)


@pytest.mark.slow
def test_sampled_pairs_follow_pair_law(rng: np.random.Generator) -> None:
    draws = 10 ** 5
    states = 0
    while states < 20:
        g = random_graph(rng, int(rng.integers(4, 11)), 0.5)
        epsilon = 0.0 if states % 2 == 0 else 0.5
        params = AttachmentParams(alpha=float(rng.uniform(0.5, 2.0)), epsilon=epsilon)
        try:
            dist = attachment_distribution(g, params)
            m = pair_matrix(dist)
        except (AllWeightsZero, DegenerateProbability):
            continue
        pairs = list(combinations(range(len(dist)), 2))
        position = {p: n for n, p in enumerate(pairs)}
        counts = np.zeros(len(pairs))
        for pair, n in sampled_pairs(g, params, WeightIndex.for_graph(g, params), draws, rng).items():
            a, b = sorted(dist.position(u) for u in pair)
            counts[position[(a, b)]] += n
        expected = np.array([m[a, b] for a, b in pairs])
        possible = expected > 0
        assert counts[~possible].sum() == 0
        if possible.sum() > 1:
            expected = expected[possible] * draws / expected[possible].sum()
            assert chisquare(counts[possible], expected).pvalue > 0.001
        assert math.isclose(counts.sum(), draws)
        states += 1


def test_pair_probability_needs_known_nodes() -> None:
    dist = ProbabilityVector([1, 2, 3], [0.5, 0.3, 0.2])
    with pytest.raises(UnknownNode) as e:
        pair_probability(dist, 1, 9)
    assert isinstance(e.value, GraphLabError)
    with pytest.raises(UnknownNode):
        dist.position(0)
