import typing as t
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .storage import atomic_path  # noqa: E402


def _save(fig: t.Any, path: t.Union[str, Path]) -> Path:
    fig.tight_layout()
    with atomic_path(path) as tmp:
        fig.savefig(tmp, format="svg")
    plt.close(fig)
    return Path(path)


def plot_increments(
    frame: pd.DataFrame, v0_size: int, path: t.Union[str, Path], column: str = "delta"
) -> Path:
    """Increments of the average clustering against the envelope +-c/(||V_0||+t+1)."""
    steps = frame["t"].to_numpy(dtype=np.float64)
    n = v0_size + steps + 1
    fig, ax = plt.subplots()
    ax.plot(steps, frame[column].to_numpy(dtype=np.float64), linewidth=0.8, label=column)
    ax.plot(steps, -3.0 / n, "k:", label="lower")
    ax.plot(steps, (7.0 / 3.0) / n, "k:", label="upper")
    ax.set_xlabel("t")
    ax.legend()
    return _save(fig, path)


def plot_tracked(
    frame: pd.DataFrame, tracked: t.Sequence[int], path: t.Union[str, Path], prefix: str = "k_"
) -> Path:
    fig, ax = plt.subplots()
    for i in tracked:
        ax.plot(frame["t"], frame[f"{prefix}{i}"], label=f"{prefix}{i}")
    ax.set_xlabel("t")
    if tracked:
        ax.legend()
    return _save(fig, path)


def plot_sweep(frame: pd.DataFrame, path: t.Union[str, Path]) -> Path:
    fig, ax = plt.subplots()
    valid = frame[frame["valid"]]
    for name, rows in valid.groupby("estimator", sort=False):
        ax.plot(rows["s"], rows["gamma"], marker=".", label=name)
    ax.axhline(0.0, color="k", linewidth=0.5)
    ax.set_xlabel("s")
    ax.set_ylabel("gamma")
    ax.legend()
    return _save(fig, path)


def plot_window_series(frame: pd.DataFrame, path: t.Union[str, Path]) -> Path:
    fig, axs = plt.subplots(2, sharex=True)
    axs[0].plot(frame["t"], frame["avg_clustering"])
    axs[0].set_title("avg_clustering")
    axs[1].plot(frame["t"], frame["total_triangles"])
    axs[1].set_title("total_triangles")
    return _save(fig, path)
