import typing as t
from logging import getLogger
from pathlib import Path

import typer

from .config import DEFAULT_ESTIMATORS, DEFAULT_S_GRID
from .errors import GraphLabError
from .pipeline import (
    cmd_evi,
    cmd_evolve,
    cmd_ingest,
    cmd_replicate,
    cmd_sweep_m0,
    parse_floats,
    parse_ints,
)

logger = getLogger(__name__)

app = typer.Typer()


def _run(command: t.Callable[..., int], *args: t.Any, **kwargs: t.Any) -> None:
    try:
        code = command(*args, **kwargs)
    except GraphLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        raise typer.Exit(code=e.exit_code)
    if code:
        raise typer.Exit(code=code)


def evolve(
    config: Path = typer.Option(..., help="flat yaml experiment config"),
    out: Path = typer.Option(Path("."), help="output directory"),
    plots: bool = False,
    progress: bool = False,
) -> None:
    _run(cmd_evolve, config, out, plots=plots, progress=progress)


def replicate(
    config: Path = typer.Option(...),
    runs: int = typer.Option(1),
    out: Path = typer.Option(Path(".")),
    tolerate_failures: bool = False,
    plots: bool = False,
    progress: bool = False,
) -> None:
    _run(
        cmd_replicate,
        config,
        runs,
        out,
        tolerate_failures=tolerate_failures,
        plots=plots,
        progress=progress,
    )


def evi(
    input: Path = typer.Option(..., help="one value per line"),
    out: Path = typer.Option(Path(".")),
    estimators: str = typer.Option(",".join(DEFAULT_ESTIMATORS)),
    s_grid: str = typer.Option(",".join(str(s) for s in DEFAULT_S_GRID)),
    min_exclusive: float = typer.Option(0.0),
    plots: bool = False,
) -> None:
    def command() -> int:
        return cmd_evi(
            input,
            out,
            [s for s in estimators.split(",") if s.strip()],
            parse_floats(s_grid),
            min_exclusive,
            plots=plots,
        )

    _run(command)


def ingest(
    input: Path = typer.Option(..., help="'u v t' lines or a csv with u,v,t columns"),
    out: Path = typer.Option(Path(".")),
    window: int = typer.Option(1),
    mode: str = typer.Option("cumulative", help="cumulative or per_window"),
    tracked: str = typer.Option("", help="comma separated node ids"),
    degree: str = typer.Option("simple", help="simple or multiplicity"),
    columns: str = typer.Option("", help="csv column names for u,v,t, e.g. src,dst,time"),
    plots: bool = False,
) -> None:
    names = columns.split(",") if columns else None
    _run(lambda: cmd_ingest(input, out, window, mode, parse_ints(tracked), degree, plots=plots, columns=names))


def sweep_m0(
    config: Path = typer.Option(...),
    m0: str = typer.Option("2,3,4,5", help="comma separated m0 values"),
    runs: int = typer.Option(1),
    out: Path = typer.Option(Path(".")),
    tolerate_failures: bool = False,
) -> None:
    _run(lambda: cmd_sweep_m0(config, parse_ints(m0), runs, out, tolerate_failures=tolerate_failures))


app.command()(evolve)
app.command()(replicate)
app.command()(evi)
app.command()(ingest)
app.command("sweep-m0")(sweep_m0)
