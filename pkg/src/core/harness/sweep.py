"""Grid of runs over signal strength, fresh-noise scale and seed."""

from __future__ import annotations

import asyncio
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from src.core import paths
from src.core.errors import DidError
from src.core.harness.config import ExperimentConfig
from src.core.harness.pipeline import run_experiment_async, write_csv
from src.core.harness.reporting import console, make_progress

SWEEP_HEADER = ["s", "tau", "seed", "detector", "acc", "auroc", "fpr_at_tpr95", "status", "config_hash"]
SUMMARY_HEADER = ["s", "tau", "detector", "mean_acc", "mean_auroc", "seeds"]


@dataclass(frozen=True)
class SweepCell:
    signal: float
    tau: float
    seed: int

    def configure(self, base: ExperimentConfig) -> ExperimentConfig:
        return base.override(**{"signal": self.signal, "operator.analytic.tau": self.tau, "seed": self.seed})


@dataclass(eq=False)
class SweepResult:
    rows: list[list] = field(default_factory=list)
    summary: list[list] = field(default_factory=list)
    # tau -> whether the seed-averaged first-order AUROC never rises as s decreases
    monotone: dict[float, bool] = field(default_factory=dict)

    def cell(self, s: float, tau: float, detector: str) -> list[list]:
        return [r for r in self.rows if r[0] == s and r[1] == tau and r[3] == detector]


def grid(config: ExperimentConfig) -> list[SweepCell]:
    seeds = [config.seed + i for i in range(config.sweep.seeds)]
    return [SweepCell(float(s), float(t), seed) for s, t, seed in product(config.sweep.signals, config.sweep.taus, seeds)]


def summarize(rows: list[list]) -> list[list]:
    groups: dict[tuple, list[list]] = {}
    for r in rows:
        if r[7] == "ok":
            groups.setdefault((r[0], r[1], r[3]), []).append(r)
    summary = []
    for (s, tau, detector), members in groups.items():
        aucs = [m[5] for m in members if m[5] is not None]
        summary.append([
            s, tau, detector,
            float(np.mean([m[4] for m in members])),
            float(np.mean(aucs)) if aucs else None,
            len(members),
        ])
    return summary


def monotonicity(summary: list[list], detector: str = "first") -> dict[float, bool]:
    """Per tau: mean AUROC, ordered by decreasing s, is non-increasing."""
    report: dict[float, bool] = {}
    for tau in sorted({r[1] for r in summary}):
        curve = sorted((r for r in summary if r[1] == tau and r[2] == detector and r[4] is not None), key=lambda r: -r[0])
        aucs = [r[4] for r in curve]
        report[tau] = all(b <= a for a, b in zip(aucs, aucs[1:]))
    return report


async def sweep_async(config: ExperimentConfig, show_progress: bool = True) -> SweepResult:
    cells = grid(config)
    limiter = asyncio.Semaphore(config.output.threads)

    async def run_cell(cell: SweepCell) -> list[list]:
        try:
            cell_config = cell.configure(config)
            result = await run_experiment_async(cell_config, limiter)
        except Exception as e:
            kind = e.kind if isinstance(e, DidError) else type(e).__name__
            console.print(f"[red]Cell s={cell.signal} tau={cell.tau} seed={cell.seed} failed: {e}[/red]")
            return [[cell.signal, cell.tau, cell.seed, "", None, None, None, f"failed: {kind}", ""]]
        finally:
            if progress:
                progress.advance(task)
        return [
            [cell.signal, cell.tau, cell.seed, r.detector, r.accuracy, r.auroc, r.fpr_at_tpr95, "ok", r.config_hash]
            for r in result.reports
        ]

    progress = make_progress() if show_progress else None
    task = None
    if progress:
        progress.start()
        task = progress.add_task("Sweeping", total=len(cells))
    try:
        per_cell = await asyncio.gather(*(run_cell(c) for c in cells))
    finally:
        if progress:
            progress.stop()
    rows = [row for cell_rows in per_cell for row in cell_rows]
    summary = summarize(rows)
    return SweepResult(rows=rows, summary=summary, monotone=monotonicity(summary))


def run_sweep(config: ExperimentConfig, show_progress: bool = True) -> SweepResult:
    return asyncio.run(sweep_async(config, show_progress))


def write_sweep(out_dir: Path, result: SweepResult) -> list[Path]:
    paths.ensure_dirs(out_dir)
    return [
        write_csv(out_dir / paths.SWEEP_FILE, SWEEP_HEADER, result.rows),
        write_csv(out_dir / paths.SWEEP_SUMMARY_FILE, SUMMARY_HEADER, result.summary),
    ]


def print_monotonicity(result: SweepResult):
    for tau, ok in result.monotone.items():
        mark = "[green]non-increasing[/green]" if ok else "[yellow]not monotone[/yellow]"
        console.print(f"first-order AUROC vs decreasing s (tau={tau}): {mark}")
