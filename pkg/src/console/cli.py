import json
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from rich.panel import Panel
from rich.table import Table

from src.core import paths
from src.core.errors import DidError
from src.core.harness import calibrate as calibration
from src.core.harness.config import ExperimentConfig, load_config
from src.core.harness.dataset import generate_dataset, read_samples, write_samples
from src.core.harness.pipeline import print_summary, run_experiment, staging, write_run
from src.core.harness.render import render as render_samples
from src.core.harness.reporting import console, set_quiet
from src.core.harness.sweep import print_monotonicity, run_sweep, write_sweep
from src.core.plugin_manager import get_operators

app = typer.Typer(
    name="didetect",
    help="Difference-in-differences detection of generated samples on synthetic manifolds.",
    add_completion=False,
)


class DetectorChoice(str, Enum):
    first = "first"
    second = "second"
    did = "did"


ConfigOption = typer.Option(None, "--config", "-c", help="Experiment config (.toml or .json).")
SeedOption = typer.Option(None, "--seed", help="Master seed; overrides the config.")
OutOption = typer.Option(None, "--out", "-o", help="Output directory; overrides the config.")
ThreadsOption = typer.Option(None, "--threads", "-t", min=1, help="Worker threads.")
QuietOption = typer.Option(False, "--quiet", "-q", help="Suppress progress output.")
SamplesOption = typer.Option(None, "--samples", help="Reuse an existing samples.csv instead of generating.")


def fail(kind: str, message: str, code: int):
    """One machine-readable line on stderr, then exit."""
    typer.echo(json.dumps({"error": kind, "message": message}), err=True)
    raise typer.Exit(code)


@contextmanager
def guarded():
    try:
        yield
    except (typer.Exit, typer.Abort):
        raise
    except DidError as e:
        fail(e.kind, str(e), 2)
    except OSError as e:
        fail("io", str(e), 2)
    except Exception as e:
        fail("internal", f"{type(e).__name__}: {e}", 1)


def resolve(
    config_path: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    threads: Optional[int],
    quiet: bool,
    **extra,
) -> tuple[ExperimentConfig, Path]:
    set_quiet(quiet)
    config = load_config(config_path).override(
        seed=seed,
        **{"output.directory": str(out) if out else None, "output.threads": threads},
        **extra,
    )
    return config, Path(config.output.directory or paths.DEFAULT_OUTPUT_DIR)


@app.command()
def generate(
    config_path: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    threads: Optional[int] = ThreadsOption,
    quiet: bool = QuietOption,
):
    """Writes the labeled dataset (samples.csv) for a config."""
    with guarded():
        config, out_dir = resolve(config_path, seed, out, threads, quiet)
        with staging(out_dir):
            entries = generate_dataset(config)
            target = write_samples(out_dir / paths.SAMPLES_FILE, entries)
        console.print(f"[green]✔ {len(entries)} samples written to {target}[/green]")


@app.command()
def run(
    config_path: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    threads: Optional[int] = ThreadsOption,
    detector: Optional[DetectorChoice] = typer.Option(None, "--detector", "-d", help="Report only this detector."),
    samples: Optional[Path] = SamplesOption,
    quiet: bool = QuietOption,
):
    """Reconstructs twice, trains both branches, evaluates the detectors and writes report.csv."""
    with guarded():
        config, out_dir = resolve(
            config_path, seed, out, threads, quiet, detectors=[detector.value] if detector else None
        )
        console.print(Panel(f"🔬 [bold green]Run[/bold green] config {config.config_hash()} · seed {config.seed}"))
        entries = read_samples(samples) if samples else None
        with staging(out_dir):
            result = run_experiment(config, entries=entries, show_progress=not quiet)
            write_run(out_dir, result)
        print_summary(result)
        console.print(f"[green]✔ Results written to {out_dir}[/green]")


@app.command()
def sweep(
    config_path: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    threads: Optional[int] = ThreadsOption,
    quiet: bool = QuietOption,
):
    """Runs the (s, tau, seed) grid and writes sweep.csv and sweep_summary.csv."""
    with guarded():
        config, out_dir = resolve(config_path, seed, out, threads, quiet)
        s = config.sweep
        console.print(Panel(
            f"🧮 [bold blue]Sweep[/bold blue] {len(s.signals)} signals × {len(s.taus)} taus × {s.seeds} seeds"
        ))
        with staging(out_dir):
            result = run_sweep(config, show_progress=not quiet)
            write_sweep(out_dir, result)
        print_monotonicity(result)
        console.print(f"[green]✔ Sweep written to {out_dir}[/green]")


@app.command()
def render(
    config_path: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    threads: Optional[int] = ThreadsOption,
    samples: Optional[Path] = SamplesOption,
    quiet: bool = QuietOption,
):
    """Writes x, Δ(x), Δ(x′) and Δ²(x) as NetPBM rasters for a few samples per class."""
    with guarded():
        config, out_dir = resolve(config_path, seed, out, threads, quiet)
        entries = read_samples(samples) if samples else None
        with staging(out_dir):
            written = render_samples(config, out_dir, entries)
        console.print(f"[green]✔ {len(written)} images written to {out_dir / paths.RENDER_DIR}[/green]")


@app.command()
def calibrate(
    config_path: Optional[Path] = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    threads: Optional[int] = ThreadsOption,
    quiet: bool = QuietOption,
):
    """Compares the printed, neutral and percentile thresholds on held-out data."""
    with guarded():
        config, out_dir = resolve(config_path, seed, out, threads, quiet)
        with staging(out_dir):
            result = run_experiment(config, show_progress=not quiet)
            rows = calibration.calibration_rows(config, result)
            calibration.write_calibration(out_dir, rows)
        table = Table(title="Threshold calibration (test split)")
        for column in calibration.CALIBRATION_HEADER:
            table.add_column(column)
        for row in rows:
            table.add_row(*(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row))
        console.print(table)


@app.command()
def operators(quiet: bool = QuietOption):
    """Lists the discovered reconstruction operators and their settings."""
    set_quiet(quiet)
    found = get_operators()
    if not found:
        console.print("[yellow]No operators found.[/yellow]")
        raise typer.Exit(1)
    for name, cls in sorted(found.items()):
        table = Table(title=f"{name} ({cls.__module__})")
        table.add_column("setting")
        table.add_column("default")
        table.add_column("description")
        for field_name, info in cls.config_class.model_fields.items():
            table.add_row(field_name, str(info.default), info.description or "")
        console.print(table)


if __name__ == "__main__":
    app()
