import json
import os
import tempfile
import typing as t
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT
from .entities import Edge, edge_key
from .errors import FileParseError, ParseError, EmptyInput

PathLike = t.Union[str, Path]


def _content_lines(lines: t.Iterable[str]) -> t.Iterator[t.Tuple[int, t.List[str]]]:
    for lineno, line in enumerate(lines, start=1):
        fields = line.split("#", 1)[0].split()
        if fields:
            yield lineno, fields


def parse_edge_list(lines: t.Iterable[str]) -> t.List[Edge]:
    edges: t.List[Edge] = []
    seen: t.Dict[Edge, int] = {}
    for lineno, fields in _content_lines(lines):
        if len(fields) != 2:
            raise FileParseError(f"expected 'u v', got {len(fields)} field(s)", lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise FileParseError(f"node ids must be integers: {fields}", lineno)
        if u < 0 or v < 0:
            raise FileParseError(f"node ids must be nonnegative: {fields}", lineno)
        if u == v:
            raise FileParseError(f"self-loop at node {u}", lineno)
        key = edge_key(u, v)
        if key in seen:
            raise FileParseError(f"edge {key} repeats line {seen[key]}", lineno)
        seen[key] = lineno
        edges.append((u, v))
    return edges


def read_edge_list(path: PathLike) -> t.List[Edge]:
    try:
        with open(path) as f:
            return parse_edge_list(f)
    except OSError as e:
        raise FileParseError(f"cannot read edge list {path}: {e}")


def read_values(path: PathLike) -> t.Any:
    values: t.List[float] = []
    try:
        with open(path) as f:
            for lineno, fields in _content_lines(f):
                if len(fields) != 1:
                    raise ParseError(f"expected one value per line, got {fields}", lineno)
                try:
                    values.append(float(fields[0]))
                except ValueError:
                    raise ParseError(f"not a number: {fields[0]!r}", lineno)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}")
    if not values:
        raise EmptyInput(f"{path} holds no values")
    return np.asarray(values, dtype=np.float64)


@contextmanager
def atomic_path(path: PathLike) -> t.Iterator[Path]:
    """Yield a temp path next to ``path``; it replaces ``path`` only on success."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    with atomic_path(path) as tmp:
        frame.to_csv(tmp, index=False, float_format=CSV_FLOAT_FORMAT)
    return Path(path)


def write_values(values: t.Iterable[t.Any], path: PathLike) -> Path:
    with atomic_path(path) as tmp:
        with open(tmp, "w") as f:
            for v in values:
                f.write(f"{v}\n")
    return Path(path)


def write_edge_list(edges: t.Iterable[Edge], path: PathLike) -> Path:
    with atomic_path(path) as tmp:
        with open(tmp, "w") as f:
            for u, v in edges:
                f.write(f"{u} {v}\n")
    return Path(path)


def write_json(data: t.Dict[str, t.Any], path: PathLike) -> Path:
    with atomic_path(path) as tmp:
        with open(tmp, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
    return Path(path)
