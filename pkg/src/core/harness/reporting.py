from typing import Iterable

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from src.core.metrics import EvalReport

# Progress and summaries go to stderr; artifacts are files, so stdout stays clean.
console = Console(stderr=True)


def set_quiet(quiet: bool):
    console.quiet = quiet


def make_progress() -> Progress:
    return Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        disable=console.quiet,
        transient=True,
    )


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def report_table(reports: Iterable[EvalReport], title: str = "Test split") -> Table:
    table = Table(title=title)
    for column in ("detector", "ACC", "AUROC", "FPR@TPR95", "TP", "FP", "TN", "FN"):
        table.add_column(column, justify="left" if column == "detector" else "right")
    for r in reports:
        c = r.counts
        table.add_row(r.detector, _fmt(r.accuracy), _fmt(r.auroc), _fmt(r.fpr_at_tpr95), str(c.tp), str(c.fp), str(c.tn), str(c.fn))
    return table
