"""Extreme value index estimators over the k largest order statistics."""
import math
import typing as t
from logging import getLogger

import numpy as np
import pandas as pd

from .config import DEFAULT_ESTIMATORS, DEFAULT_S_GRID
from .entities import EstimatorResult
from .errors import (
    ConfigError,
    DegenerateDenominator,
    EmptyAfterFilter,
    EstimatorError,
    KOutOfRange,
    NonpositiveUH,
)

logger = getLogger(__name__)

# |1 - H^2/S| below this is a constant tail
MOMENT_EPS = 1e-10


class OrderedSample:
    """Positive values sorted ascending: X_(1) <= ... <= X_(n)."""

    def __init__(self, values: t.Any) -> None:
        x = np.sort(np.asarray(values, dtype=np.float64))
        if len(x) and x[0] <= 0:
            raise ValueError(f"order statistics must be positive, got {x[0]}")
        self.values = x

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def top(self, k: int) -> t.Any:
        return self.values[self.n - k :]

    def threshold(self, k: int) -> float:
        """X_(n-k)."""
        return float(self.values[self.n - k - 1])


def filter_sample(values: t.Iterable[float], min_exclusive: float, min_size: int = 1) -> OrderedSample:
    x = np.asarray(list(values), dtype=np.float64)
    kept = x[(x > min_exclusive) & (x > 0)]
    if len(kept) < max(min_size, 1):
        raise EmptyAfterFilter(
            f"{len(kept)} of {len(x)} value(s) above {min_exclusive}, need at least {max(min_size, 1)}"
        )
    return OrderedSample(kept)


def _check_k(s: OrderedSample, k: int, largest: int) -> None:
    if not 1 <= k <= largest:
        raise KOutOfRange(f"k={k} outside [1, {largest}] for n={s.n}")


def _log_excess(s: OrderedSample, k: int) -> t.Any:
    _check_k(s, k, s.n - 1)
    return np.log(s.top(k) / s.threshold(k))


def hill(s: OrderedSample, k: int) -> float:
    return float(np.mean(_log_excess(s, k)))


def moment(s: OrderedSample, k: int) -> float:
    excess = _log_excess(s, k)
    h = float(np.mean(excess))
    second = float(np.mean(excess ** 2))
    if second == 0 or abs(1.0 - h * h / second) < MOMENT_EPS:
        raise DegenerateDenominator(f"moment denominator vanishes at k={k}")
    return h + 1.0 - 0.5 / (1.0 - h * h / second)


def uh(s: OrderedSample, k: int) -> float:
    _check_k(s, k, s.n - 2)
    desc = s.values[::-1][: k + 2]
    logs = np.log(desc)
    i = np.arange(1, k + 2)
    # Hill estimate with i upper order statistics, i = 1..k+1
    hills = np.cumsum(logs)[:-1] / i - logs[1:]
    uhs = desc[1:] * hills
    if np.any(uhs <= 0):
        raise NonpositiveUH(f"UH statistics must be positive at k={k}")
    log_uh = np.log(uhs)
    return float(np.mean(log_uh[:k]) - log_uh[k])


def mixed_moment(s: OrderedSample, k: int) -> float:
    excess = _log_excess(s, k)
    h = float(np.mean(excess))
    l1 = 1.0 - float(np.mean(s.threshold(k) / s.top(k)))
    if l1 == 0:
        raise DegenerateDenominator(f"mixed moment L1 vanishes at k={k}")
    phi = (h - l1) / (l1 * l1)
    denominator = 1.0 + 2.0 * min(phi - 1.0, 0.0)
    if denominator == 0:
        raise DegenerateDenominator(f"mixed moment denominator vanishes at k={k}")
    return (phi - 1.0) / denominator


Estimator = t.Callable[[OrderedSample, int], float]
ESTIMATORS: t.Dict[str, Estimator] = {
    "hill": hill,
    "moment": moment,
    "uh": uh,
    "mixed_moment": mixed_moment,
}


def parse_estimators(names: t.Iterable[str]) -> t.List[str]:
    parsed = [n.strip().lower().replace("-", "_") for n in names if n.strip()]
    unknown = [n for n in parsed if n not in ESTIMATORS]
    if unknown or not parsed:
        raise ConfigError(f"estimators must be among {sorted(ESTIMATORS)}, got {list(names)}")
    return parsed


def sweep_k(n: int, s: float) -> int:
    return int(math.floor(n ** s + 1e-9))


def evi_sweep(
    sample: OrderedSample,
    estimators: t.Iterable[str] = DEFAULT_ESTIMATORS,
    s_grid: t.Iterable[float] = DEFAULT_S_GRID,
) -> t.List[EstimatorResult]:
    """One estimate per (estimator, s) with k = [n^s]; failures become invalid rows."""
    grid = [float(s) for s in s_grid]
    bad = [s for s in grid if not 0 < s < 1]
    if bad:
        raise ConfigError(f"s grid values must lie in (0, 1), got {bad}")
    names = parse_estimators(estimators)
    results = []
    for name in names:
        estimator = ESTIMATORS[name]
        for s in grid:
            k = sweep_k(sample.n, s)
            try:
                gamma = estimator(sample, k)
            except EstimatorError as e:
                results.append(EstimatorResult(name, k, sample.n, math.nan, False, s, e.reason))
                continue
            results.append(EstimatorResult(name, k, sample.n, gamma, True, s))
    invalid = sum(1 for r in results if not r.valid)
    logger.info(f"evi sweep n={sample.n} cells={len(results)} {invalid=}")
    return results


def sweep_frame(results: t.Sequence[EstimatorResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"estimator": r.estimator, "s": r.s, "k": r.k, "gamma": r.gamma, "valid": r.valid} for r in results],
        columns=["estimator", "s", "k", "gamma", "valid"],
    )
