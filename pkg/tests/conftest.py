import typing as t
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest
import yaml

from ca_graphlab.graph import Graph


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    nodes = range(1, n + 1)
    edges = [(u, v) for u, v in combinations(nodes, 2) if rng.random() < p]
    return Graph.from_edges(edges, nodes=nodes)


def write_ring_lattice(path: Path, n: int) -> Path:
    """Ring on nodes 1..n with each node joined to its two nearest neighbours on both sides."""
    with open(path, "w") as f:
        for i in range(n):
            for hop in (1, 2):
                f.write(f"{i + 1} {(i + hop) % n + 1}\n")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20201017)


@pytest.fixture
def write_config(tmp_path: Path) -> t.Callable[..., Path]:
    def write(name: str = "config.yaml", **values: t.Any) -> Path:
        path = tmp_path.joinpath(name)
        with open(path, "w") as f:
            yaml.safe_dump(values, f)
        return path

    return write
