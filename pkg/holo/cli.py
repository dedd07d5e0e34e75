"""CLI interface for Holonomy Lab using Typer."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import TypeVar

import numpy as np
import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from holonomy_lab import __version__
from holonomy_lab.config import settings
from holonomy_lab.curvature import (
    curvature_blocks,
    curvature_numeric,
    lie_closure_dimension,
    span_dimension,
)
from holonomy_lab.errors import HolonomyError
from holonomy_lab.fock import convergence_table, fit_scaling_exponent
from holonomy_lab.frames import connection_field, cpn_frame_field, family_unitary
from holonomy_lab.holonomy import (
    adiabatic_block,
    berry_phase,
    block_dynamical_phase,
    holonomy_abelian_flux,
    holonomy_ordered,
    stokes_rectangle,
    transport_holonomy,
)
from holonomy_lab.loops import ellipse_loop, loop_from_spec
from holonomy_lab.manifold import Chart
from holonomy_lab.schemas import (
    AdiabaticConfig,
    ChartKind,
    CurvatureConfig,
    HolonomyConfig,
    HolonomyMethod,
    KickTableConfig,
    MatrixPayload,
    SynthesisConfig,
)
from holonomy_lab.synthesis import synthesize_u2, wrap_angle

app = typer.Typer(
    name="holonomy",
    help="Holonomy Lab - holonomies, curvature, kick tables and loop synthesis",
    add_completion=True,
)
console = Console(stderr=True)
logger = logging.getLogger("holo")

Model = TypeVar("Model", bound=BaseModel)

EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2


def _configure_logging(verbose: bool) -> None:
    level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    if verbose:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _fail(message: str, code: int) -> typer.Exit:
    console.print(f"[bold red]✗[/bold red] {message}")
    return typer.Exit(code)


def _load(path: Path | None, model: type[Model]) -> Model:
    """Parse a JSON config file; a missing path yields the model defaults."""
    try:
        if path is None:
            return model()
        return model.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except FileNotFoundError as exc:
        raise _fail(f"config not found: {path}", EXIT_BAD_INPUT) from exc
    except json.JSONDecodeError as exc:
        raise _fail(f"malformed JSON in {path}: {exc}", EXIT_BAD_INPUT) from exc
    except ValidationError as exc:
        raise _fail(f"invalid {model.__name__}: {exc}", EXIT_BAD_INPUT) from exc


def _dumps(payload: BaseModel | dict) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        typer.echo(text)
        return
    out.write_text(text + "\n", encoding="utf-8")
    console.print(f"[bold green]✓[/bold green] Results written to {out}")


ConfigOption = typer.Option(None, "--config", "-c", help="Experiment config (JSON)")
OutOption = typer.Option(None, "--out", "-o", help="Write results to this file")
StepsOption = typer.Option(None, "--steps", "-s", help="Discretization steps")
CutoffOption = typer.Option(None, "--cutoff", help="Fock-space cutoff")
SeedOption = typer.Option(None, "--seed", help="Seed for randomized sample points")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Enable debug logging")


@app.command()
def holonomy(
    config: Path = typer.Option(..., "--config", "-c", help="Holonomy config (JSON)"),
    out: Path | None = OutOption,
    steps: int | None = StepsOption,
    cutoff: int | None = CutoffOption,
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate the holonomy of a loop."""
    _configure_logging(verbose)
    cfg = _load(config, HolonomyConfig)
    steps = steps if steps is not None else cfg.steps
    cutoff = cutoff if cutoff is not None else cfg.cutoff
    try:
        loop = loop_from_spec(cfg.loop)
        field = connection_field(loop.chart, cutoff)
        if cfg.method == HolonomyMethod.ORDERED:
            result = holonomy_ordered(field, loop, steps)
        elif cfg.method == HolonomyMethod.TRANSPORT:
            result = transport_holonomy(field, loop, steps)
        elif cfg.method == HolonomyMethod.FLUX:
            result = holonomy_abelian_flux(field, loop)
        else:
            result = stokes_rectangle(field, loop, steps, steps)
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    _emit(_dumps(result.to_report()), out)


@app.command()
def curvature(
    config: Path = typer.Option(..., "--config", "-c", help="Curvature config (JSON)"),
    out: Path | None = OutOption,
    cutoff: int | None = CutoffOption,
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate one field-strength component at a point."""
    _configure_logging(verbose)
    cfg = _load(config, CurvatureConfig)
    try:
        chart = Chart.from_descriptor(cfg)
        field = connection_field(chart, cutoff if cutoff is not None else cfg.cutoff)
        value = curvature_numeric(field, cfg.coords, cfg.mu, cfg.nu, cfg.h)
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    payload = {"mu": cfg.mu, "nu": cfg.nu, "value": MatrixPayload.from_array(value).model_dump()}
    _emit(_dumps(payload), out)


@app.command()
def irreducibility(
    chart: ChartKind = typer.Option(ChartKind.CPN, "--chart", help="Control chart"),
    n: int | None = typer.Option(None, "--n", "-n", help="CP^n dimension"),
    out: Path | None = OutOption,
    cutoff: int | None = CutoffOption,
    seed: int | None = SeedOption,
    verbose: bool = VerboseOption,
) -> None:
    """Count the span and Lie closure of the curvature at the origin, or a seeded random point."""
    _configure_logging(verbose)
    try:
        if chart in (ChartKind.CPN, ChartKind.CPN_Z):
            # the theta/phi chart is singular at the origin; use z coordinates there
            where = Chart(ChartKind.CPN_Z, n or 2)
        else:
            where = Chart(chart)
        point = np.zeros(where.dim)
        if seed is not None:
            point = np.random.default_rng(seed).uniform(-0.5, 0.5, where.dim)
        field = connection_field(where, cutoff)
        blocks = list(curvature_blocks(field, point).values())
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    payload = {
        "span_dim": span_dimension(blocks),
        "lie_dim": lie_closure_dimension(blocks),
        "n_squared": field.block_dim**2,
    }
    _emit(_dumps(payload), out)


@app.command("kick-table")
def kick_table(
    config: Path | None = ConfigOption,
    out: Path | None = OutOption,
    cutoff: int | None = CutoffOption,
    verbose: bool = VerboseOption,
) -> None:
    """Percentage deviations of the kicked Kerr evolution from a fine reference (CSV)."""
    _configure_logging(verbose)
    cfg = _load(config, KickTableConfig)
    try:
        table = convergence_table(
            cfg.Ns,
            cfg.ref_n,
            cfg.radius,
            cfg.T,
            cfg.X,
            cutoff if cutoff is not None else cfg.cutoff,
            cfg.origin_start,
            cfg.check_cutoff,
        )
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["N", "dev00", "dev01", "dev10", "dev11"])
    for row in table.rows:
        writer.writerow([row.N] + ["" if d is None else f"{d:.6f}" for d in row.deviations])
    if verbose:
        preview = Table(show_header=True, header_style="bold magenta")
        for name in ("N", "dev00 %", "dev01 %", "dev10 %", "dev11 %"):
            preview.add_column(name, justify="right")
        for row in table.rows:
            preview.add_row(str(row.N), *("-" if d is None else f"{d:.4f}" for d in row.deviations))
        console.print(preview)
    if table.cutoff_sensitivity is not None:
        console.print(f"[dim]Cutoff sensitivity:[/dim] {table.cutoff_sensitivity:.3e}")
    _emit(buffer.getvalue().rstrip("\n"), out)


@app.command()
def synthesize(
    target: Path | None = typer.Option(None, "--target", "-t", help="Target matrix (JSON)"),
    config: Path | None = ConfigOption,
    out: Path | None = OutOption,
    steps: int | None = StepsOption,
    verbose: bool = VerboseOption,
) -> None:
    """Build a CP^2 loop program for a 2x2 unitary and verify it with the engine."""
    _configure_logging(verbose)
    if target is not None:
        cfg = SynthesisConfig(target=_load(target, MatrixPayload))
    elif config is not None:
        cfg = _load(config, SynthesisConfig)
    else:
        raise _fail("pass --target or --config", EXIT_BAD_INPUT)
    try:
        goal = cfg.target.to_array()
        program = synthesize_u2(goal, cfg.tol)
        report = program.report(goal, cfg.tol, steps if steps is not None else cfg.steps)
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    if not report.within_tolerance:
        logger.warning("program misses the target by %.3e (tolerance %.1e)", report.error, cfg.tol)
    _emit(_dumps(report), out)


@app.command("adiabatic-check")
def adiabatic_check(
    config: Path | None = ConfigOption,
    out: Path | None = OutOption,
    steps: int | None = StepsOption,
    verbose: bool = VerboseOption,
) -> None:
    """Compare kicked adiabatic evolution around a CP^1 ellipse with its Berry phase."""
    _configure_logging(verbose)
    cfg = _load(config, AdiabaticConfig)
    chart = Chart.cpn(1)
    try:
        loop = ellipse_loop(chart, ("theta_1", "phi_1"), None, cfg.center, cfg.semi_axes)
        geometric = berry_phase(cpn_frame_field(1), loop, steps, wrap=False)
        h0 = np.diag([cfg.ground_energy, cfg.ground_energy + cfg.gap]).astype(complex)
        rows = []
        for duration in cfg.durations:
            slices = max(1, round(duration / cfg.dt))
            block = adiabatic_block(
                h0, lambda p: family_unitary(chart, p), loop, duration, slices, [0]
            )[0, 0]
            dynamical = block_dynamical_phase(h0, [0], duration)
            expected = dynamical * np.exp(1j * geometric)
            closure = wrap_angle(float(np.angle(block)) - float(np.angle(dynamical)) - geometric)
            rows.append({"T": duration, "error": float(abs(block - expected)), "closure": closure})
    except HolonomyError as exc:
        raise _fail(str(exc), EXIT_FAILURE) from exc
    slope = None
    if len(rows) >= 2 and all(r["error"] > 0 for r in rows):
        slope = fit_scaling_exponent([r["T"] for r in rows], [r["error"] for r in rows])
    payload = {"berry_phase": geometric, "rows": rows, "fitted_exponent": slope}
    _emit(_dumps(payload), out)


@app.command()
def version() -> None:
    """Show the installed version."""
    typer.echo(__version__)


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
