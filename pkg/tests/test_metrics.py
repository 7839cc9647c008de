from itertools import combinations

import numpy as np
import pytest

from ca_graphlab.attachment import AttachmentParams, ProbabilityVector, attachment_distribution
from ca_graphlab.entities import MetricsRecord
from ca_graphlab.errors import AllWeightsZero, DegenerateProbability, EmptyGraph
from ca_graphlab.evolution import Evolution, EvolutionConfig, init_graph, run
from ca_graphlab.graph import Graph
from ca_graphlab.metrics import (
    IncrementCase,
    avg_clustering,
    bound_slack_hits,
    bound_violations,
    case_envelope,
    classify_increment,
    degree_increment_probabilities,
    degree_increment_probability,
    enumerate_increments,
    expected_triangle_increment,
    increment_bounds,
    replay_increments,
    submartingale_check,
    tail_counts,
    total_triangles,
    triangle_increment_probabilities,
    triangle_increment_probability,
    updated_clustering,
)
from .conftest import random_graph


def test_avg_clustering() -> None:
    assert avg_clustering(init_graph("triangle")) == 1.0
    assert avg_clustering(init_graph("rectangle")) == 0.0
    assert avg_clustering(init_graph("rectangle_diag")) == pytest.approx(5 / 6, abs=1e-12)
    g = Graph.from_edges([(1, 2), (2, 3), (3, 1)], nodes=[4])
    assert avg_clustering(g) == 0.75
    with pytest.raises(EmptyGraph):
        avg_clustering(Graph())


def test_increment_bounds() -> None:
    lower, upper = increment_bounds(4, 0)
    assert lower == pytest.approx(-0.6)
    assert upper == pytest.approx(0.4666667, abs=1e-7)
    assert increment_bounds(3, 7) == pytest.approx((-3 / 11, 7 / 33))
    widths = [increment_bounds(3, t).upper - increment_bounds(3, t).lower for t in (0, 10, 100, 1000)]
    assert widths == sorted(widths, reverse=True)
    assert increment_bounds(3, 10 ** 9).contains(0.0)


def test_total_triangles() -> None:
    assert total_triangles(init_graph("triangle")) == 1
    assert total_triangles(init_graph("complete:4")) == 4
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = random_graph(rng, 10, 0.4)
        brute = sum(
            1
            for a, b, c in combinations(g.nodes(), 3)
            if g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(a, c)
        )
        assert total_triangles(g) == brute


def test_degree_increment_probability() -> None:
    params = AttachmentParams(alpha=1.0, epsilon=0.0)
    dist = attachment_distribution(init_graph("triangle"), params)
    assert degree_increment_probability(dist, 1) == pytest.approx(2 / 3)
    rectangle = attachment_distribution(init_graph("rectangle"), AttachmentParams(alpha=2.5, epsilon=0.3))
    assert degree_increment_probability(rectangle, 3) == pytest.approx(0.5)
    skewed = ProbabilityVector([1, 2, 3], [0.5, 0.3, 0.2])
    assert degree_increment_probability(skewed, 1) == pytest.approx(0.8392857, abs=1e-7)
    assert degree_increment_probabilities(skewed).sum() == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DegenerateProbability):
        degree_increment_probability(ProbabilityVector([1, 2], [1.0, 0.0]), 1)


def test_triangle_increment_probability() -> None:
    triangle = init_graph("triangle")
    dist = attachment_distribution(triangle, AttachmentParams())
    assert triangle_increment_probability(triangle, dist, 2) == pytest.approx(2 / 3)
    rectangle = init_graph("rectangle")
    dist = attachment_distribution(rectangle, AttachmentParams(epsilon=1.0))
    assert triangle_increment_probability(rectangle, dist, 1) == pytest.approx(1 / 3)
    assert list(triangle_increment_probabilities(rectangle, dist)) == pytest.approx([1 / 3] * 4)


def test_closed_forms_match_enumeration() -> None:
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        g = random_graph(rng, int(rng.integers(3, 13)), float(rng.uniform(0.2, 0.8)))
        params = AttachmentParams(alpha=float(rng.uniform(0.0, 3.0)), epsilon=float(rng.choice([0.0, 0.5, 1.0])))
        try:
            dist = attachment_distribution(g, params)
            enumerated = enumerate_increments(g, dist)
        except (AllWeightsZero, DegenerateProbability):
            continue
        p1 = degree_increment_probabilities(dist)
        p2 = triangle_increment_probabilities(g, dist)
        assert np.abs(p1 - enumerated.degree).max() < 1e-12
        assert np.abs(p2 - enumerated.triangle).max() < 1e-12
        assert abs(p1.sum() - 2.0) < 1e-10
        for i in g.nodes():
            assert degree_increment_probability(dist, i) == pytest.approx(p1[dist.position(i)], abs=1e-12)
            assert triangle_increment_probability(g, dist, i) == pytest.approx(p2[dist.position(i)], abs=1e-12)
        assert expected_triangle_increment(g, dist) == pytest.approx(enumerated.closes_triangle, abs=1e-12)
        assert expected_triangle_increment(g, dist) >= 0
        checked += 1


def test_replayed_increments_match_closed_forms() -> None:
    rng = np.random.default_rng(5)
    g = random_graph(rng, 8, 0.5)
    params = AttachmentParams(alpha=1.0, epsilon=0.5)
    dist = attachment_distribution(g, params)
    replays = 10000
    means = replay_increments(g, params, 2, replays, rng)
    for p, mean in (
        (degree_increment_probabilities(dist), means.degree[dist.ids]),
        (triangle_increment_probabilities(g, dist), means.triangle[dist.ids]),
    ):
        sigma = np.sqrt(p * (1 - p) / replays)
        ok = np.where(sigma > 0, np.abs(mean - p) <= 3 * sigma, mean == p)
        assert ok.all()


def test_submartingale_check() -> None:
    config = EvolutionConfig(AttachmentParams(alpha=1.0, epsilon=0.5), steps=30, seed=2)
    report = submartingale_check(run(config), replays=2000, samples=4)
    assert report.steps == [0, 10, 20, 30]
    assert report.ok
    assert report.enumerated == 4
    assert report.max_discrepancy < 1e-12
    assert report.max_degree_sum_error < 1e-10
    assert report.min_total_increment >= 0
    assert report.max_degree_z < 5
    assert report.as_dict()["ok"]


def test_submartingale_check_beyond_two_targets() -> None:
    config = EvolutionConfig(AttachmentParams(alpha=1.0, epsilon=1.0), m0=3, initial="complete:5", steps=10, seed=2)
    report = submartingale_check(run(config), replays=200, samples=3)
    assert report.enumerated == 0
    assert report.min_degree_increment > 0
    assert report.ok


def test_classified_increments_stay_in_case_envelopes() -> None:
    seen = set()
    for initial, epsilon in (("triangle", 1.0), ("triangle", 0.0), ("rectangle", 0.2)):
        config = EvolutionConfig(AttachmentParams(alpha=1.0, epsilon=epsilon), initial=initial, steps=300, seed=9)
        trajectory = run(config)
        for report, record in zip(trajectory.reports, trajectory.records):
            case = classify_increment(report)
            seen.add(case)
            assert case_envelope(case, trajectory.v0_size, record.t).contains(record.increment, 1e-12)
    assert IncrementCase.APART_BOTH_HIGH in seen
    assert IncrementCase.ADJACENT_BOTH_HIGH in seen


def test_classify_increment_cases() -> None:
    config = EvolutionConfig(forced_targets=[1, 2], initial="complete:2", steps=1)
    report = run(config).reports[0]
    assert report.target_degrees == (1, 1)
    assert classify_increment(report) == IncrementCase.ADJACENT_BOTH_LOW
    lower, upper = case_envelope(IncrementCase.ADJACENT_BOTH_LOW, 2, 0)
    assert (lower, upper) == pytest.approx((-1.0, -2 / 3))


def test_local_clustering_updates() -> None:
    config = EvolutionConfig(AttachmentParams(alpha=1.0, epsilon=0.3), initial="rectangle_diag", steps=200, seed=4)
    evolution = Evolution(config)
    for _ in range(config.steps):
        report = evolution.advance()
        g = evolution.graph
        for j, k, c in zip(report.targets, report.target_degrees, report.target_clustering):
            predicted = updated_clustering(k, c, report.targets_adjacent)
            assert g.clustering_coefficient(j) == pytest.approx(predicted, abs=1e-12)
        assert g.clustering_coefficient(report.new_node) == (1.0 if report.targets_adjacent else 0.0)


def test_updated_clustering_boundaries() -> None:
    assert updated_clustering(0, 0.0, False) == 0.0
    assert updated_clustering(1, 0.0, True) == 1.0
    assert updated_clustering(2, 1.0, False) == pytest.approx(1 / 3)
    assert updated_clustering(2, 0.0, True) == pytest.approx(1 / 3)


def test_tail_counts() -> None:
    g = Graph.from_edges([(1, 2), (2, 3), (3, 1), (3, 4)], nodes=[5])
    counts = tail_counts(g, 1)
    assert counts.n_nodes == 5
    assert counts.degree_above_min == 3
    assert counts.triangle_positive == 3
    assert counts.isolated == 1


def test_bound_violations() -> None:
    records = [
        MetricsRecord(0, 3, 3, 1.0, 1, {}, increment=0.1),
        MetricsRecord(1, 4, 5, 0.9, 1, {}, increment=-0.9),
        MetricsRecord(2, 5, 7, 1.0, 2, {}),
    ]
    assert bound_violations(records, 3) == [1]


def test_bound_slack_hits() -> None:
    upper = increment_bounds(3, 1).upper
    records = [
        MetricsRecord(0, 3, 3, 1.0, 1, {}, increment=increment_bounds(3, 0).upper),
        MetricsRecord(1, 4, 5, 0.9, 1, {}, increment=upper + 1e-13),
        MetricsRecord(2, 5, 7, 1.0, 2, {}, increment=increment_bounds(3, 2).lower - 1e-13),
        MetricsRecord(3, 6, 9, 1.0, 3, {}, increment=-0.9),
        MetricsRecord(4, 7, 11, 1.0, 3, {}),
    ]
    assert bound_slack_hits(records, 3) == [1, 2]
    assert bound_violations(records, 3) == [3]
