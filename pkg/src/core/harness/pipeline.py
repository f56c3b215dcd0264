"""End-to-end run: generate, reconstruct, featurize, train, evaluate, write."""

from __future__ import annotations

import asyncio
import csv
import shutil
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
from rich.progress import Progress

from src.core import paths, seeding
from src.core.detector import serialization
from src.core.detector.classifier import LogisticClassifier, train
from src.core.detector.ensemble import (
    DetectorEnsemble,
    analytic_threshold,
    clamp_open_unit,
    fake_mask,
    fused_score,
    neutral_threshold,
    percentile_threshold,
)
from src.core.errors import CalibrationError
from src.core.harness.config import DETECTORS, ExperimentConfig, ThresholdMode, ThresholdSection
from src.core.harness.dataset import DatasetEntry, Split, build_manifold, generate_dataset, select, write_samples
from src.core.harness.reporting import console, make_progress, report_table
from src.core.interfaces import BaseOperator
from src.core.manifold import Label, ManifoldModel, distance_to_manifold
from src.core.metrics import EvalReport
from src.core.plugin_manager import create_operator
from src.core.reconstruction.trace import ReconstructionTrace, reconstruct_chain
from src.core.residuals import Branch, ResidualSet, feature_layout, residual_set, summarize_many

CHUNK = 256

REPORT_HEADER = [
    "detector", "acc", "auroc", "fpr_at_tpr95", "tp", "fp", "tn", "fn",
    "threshold", "signal", "tau", "seed", "config_hash",
]


@dataclass(eq=False)
class RunResult:
    config: ExperimentConfig
    entries: list[DatasetEntry]
    ensemble: DetectorEnsemble
    alt_threshold: float
    reports: list[EvalReport]
    thresholds: dict[str, float]
    decisions: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)
    train_features: dict[Branch, np.ndarray] = field(default_factory=dict)
    test_features: dict[Branch, np.ndarray] = field(default_factory=dict)
    # held-out reals the percentile rules are fitted on: VAL when it has any, else TRAIN
    calibration_features: dict[Branch, np.ndarray] = field(default_factory=dict)
    calibration_split: Split = Split.TRAIN

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def report(self, detector: str) -> EvalReport:
        return next(r for r in self.reports if r.detector == detector)


def build_operator(config: ExperimentConfig, manifold: ManifoldModel) -> BaseOperator:
    return create_operator(config.operator.name, manifold, config.operator.settings())


def operator_tau(config: ExperimentConfig) -> float:
    return config.operator.analytic.tau if config.operator.name == "analytic" else 0.0


async def reconstruct_all(
    entries: Sequence[DatasetEntry],
    operator: BaseOperator,
    seed: int,
    order: int,
    limiter: asyncio.Semaphore,
    progress: Optional[Progress] = None,
) -> list[ReconstructionTrace]:
    """Chunks run in worker threads; sample i always uses stream (seed, i, RECONSTRUCT)."""
    task = progress.add_task("Reconstructing", total=len(entries)) if progress else None

    def work(chunk: Sequence[DatasetEntry]) -> list[ReconstructionTrace]:
        return [
            reconstruct_chain(
                operator, e.point, seeding.stream(seed, e.index, seeding.RECONSTRUCT), order=order, seed_id=e.index
            )
            for e in chunk
        ]

    async def run_chunk(chunk: Sequence[DatasetEntry]) -> list[ReconstructionTrace]:
        async with limiter:
            traces = await asyncio.to_thread(work, chunk)
        if progress:
            progress.advance(task, len(chunk))
        return traces

    chunks = [entries[i:i + CHUNK] for i in range(0, len(entries), CHUNK)]
    results = await asyncio.gather(*(run_chunk(c) for c in chunks))
    return [t for chunk in results for t in chunk]


def stack_residuals(traces: Sequence[ReconstructionTrace]) -> ResidualSet:
    """Residuals for many traces at once, rows in trace order."""
    third = traces[0].x3 is not None
    batch = ReconstructionTrace(
        x=np.stack([t.x for t in traces]),
        x1=np.stack([t.x1 for t in traces]),
        x2=np.stack([t.x2 for t in traces]),
        x3=np.stack([t.x3 for t in traces]) if third else None,
    )
    return residual_set(batch)


def featurize(residuals: ResidualSet, branches: Sequence[Branch]) -> dict[Branch, np.ndarray]:
    return {b: summarize_many(residuals.branch(b), b) for b in branches}


def targets(entries: Sequence[DatasetEntry]) -> np.ndarray:
    return np.array([e.label.target for e in entries], dtype=int)


def ensemble_threshold(section: ThresholdSection, fused_train_real: np.ndarray) -> float:
    if section.mode is ThresholdMode.PRINTED:
        return analytic_threshold(section.target)
    if section.mode is ThresholdMode.NEUTRAL:
        return neutral_threshold(section.target)
    if section.mode is ThresholdMode.FIXED:
        return section.fixed
    return clamp_open_unit(percentile_threshold(fused_train_real, section.percentile))


def alternative_threshold(section: ThresholdSection) -> float:
    """The other analytic calibration, reported as the second DID operating point."""
    if section.mode is ThresholdMode.PRINTED:
        return neutral_threshold(section.target)
    return analytic_threshold(section.target)


def single_threshold(section: ThresholdSection, train_real_scores: np.ndarray) -> float:
    if section.mode is ThresholdMode.FIXED:
        return section.fixed
    if section.mode is ThresholdMode.PERCENTILE:
        return clamp_open_unit(percentile_threshold(train_real_scores, section.percentile))
    return section.target


def recon_scores(residuals: ResidualSet) -> np.ndarray:
    """Training-free baseline: generated samples reconstruct closer, so −mean Δ is higher for them."""
    return -residuals.delta1.mean(axis=1)


async def train_branches(
    features: dict[Branch, np.ndarray], y: np.ndarray, config: ExperimentConfig
) -> dict[Branch, LogisticClassifier]:
    settings = config.detector.training
    branches = list(features)
    trained = await asyncio.gather(
        *(asyncio.to_thread(train, features[b], y, settings, feature_layout(b)) for b in branches)
    )
    return dict(zip(branches, trained))


def diagnostics(manifold: ManifoldModel, entries: Sequence[DatasetEntry], residuals: ResidualSet) -> list[dict]:
    """How far Δ² is from the exact off-manifold offset, per class."""
    rows = []
    y = targets(entries)
    for label in (Label.REAL, Label.FAKE):
        mask = y == label.target
        if not mask.any():
            continue
        d2 = residuals.delta2[mask]
        offsets = np.array([distance_to_manifold(manifold, e.point) for e, m in zip(entries, mask) if m])
        ratios = np.linalg.norm(d2, axis=1)[offsets > 0] / offsets[offsets > 0]
        rows.append({
            "label": label.value,
            "count": int(mask.sum()),
            "mean_abs_delta2": float(np.mean(np.abs(d2))),
            "max_abs_delta2": float(np.max(np.abs(d2))),
            "mean_offset": float(offsets.mean()),
            "mean_gap_ratio": float(ratios.mean()) if ratios.size else None,
        })
    return rows


async def run_experiment_async(
    config: ExperimentConfig,
    limiter: Optional[asyncio.Semaphore] = None,
    progress: Optional[Progress] = None,
    entries: Optional[list[DatasetEntry]] = None,
) -> RunResult:
    limiter = limiter or asyncio.Semaphore(config.output.threads)
    manifold = build_manifold(config.manifold)
    operator = build_operator(config, manifold)
    ok, message = operator.healthcheck()
    if not ok:
        raise CalibrationError(f"operator '{operator.name}' is not usable: {message}")
    if entries is None:
        async with limiter:
            entries = await asyncio.to_thread(generate_dataset, config, manifold)
    train_set, val_set, test_set = (select(entries, s) for s in (Split.TRAIN, Split.VAL, Split.TEST))
    if not train_set or not test_set:
        raise CalibrationError("both the train and the test split must be nonempty")
    calibration_split = Split.VAL if any(e.label is Label.REAL for e in val_set) else Split.TRAIN

    third = config.detector.third_order
    branches = [Branch.DELTA1, Branch.DELTA2] + ([Branch.DELTA3] if third else [])
    order = 3 if third else 2

    traces = await reconstruct_all(train_set + val_set + test_set, operator, config.seed, order, limiter, progress)
    n_train, n_val = len(train_set), len(val_set)
    train_res = stack_residuals(traces[:n_train])
    test_res = stack_residuals(traces[n_train + n_val:])
    train_feats, test_feats = featurize(train_res, branches), featurize(test_res, branches)
    y_train, y_test = targets(train_set), targets(test_set)
    if calibration_split is Split.VAL:
        calib_res = stack_residuals(traces[n_train:n_train + n_val])
        calib_feats, y_calib = featurize(calib_res, branches), targets(val_set)
    else:
        calib_res, calib_feats, y_calib = train_res, train_feats, y_train

    classifiers = await train_branches(train_feats, y_train, config)
    section = config.threshold
    scorer = DetectorEnsemble(classifiers, fusion=section.fusion)
    calib_scores = scorer.score_matrix(calib_feats)
    real_rows = y_calib == 0
    two = [0, 1]
    c = ensemble_threshold(section, fused_score(calib_scores[real_rows][:, two], section.fusion))
    ensemble = scorer.with_threshold(c)
    alt = alternative_threshold(section)

    test_scores = ensemble.score_matrix(test_feats)
    outcomes: dict[str, tuple[np.ndarray, np.ndarray, float]] = {}
    for i, name in enumerate(("first", "second")):
        t = single_threshold(section, calib_scores[real_rows, i])
        outcomes[name] = (test_scores[:, i] >= t, test_scores[:, i], t)
    fused = fused_score(test_scores[:, two], section.fusion)
    outcomes["did"] = (fake_mask(test_scores[:, two], c, section.fusion), fused, c)
    outcomes["did-alt"] = (fake_mask(test_scores[:, two], alt, section.fusion), fused, alt)
    if third:
        outcomes["did3"] = (fake_mask(test_scores, c, section.fusion), fused_score(test_scores, section.fusion), c)
    recon_t = percentile_threshold(recon_scores(calib_res)[real_rows], 95.0)
    recon_test = recon_scores(test_res)
    outcomes["recon"] = (recon_test > recon_t, recon_test, recon_t)

    wanted = config.detectors or list(DETECTORS)
    h = config.config_hash()
    reports, thresholds, decisions = [], {}, {}
    for name in DETECTORS:
        if name not in outcomes or name not in wanted:
            continue
        fake, scores, t = outcomes[name]
        reports.append(EvalReport.evaluate(name, fake.astype(int), scores, y_test, h, config.seed))
        thresholds[name] = float(t)
        decisions[name] = fake

    return RunResult(
        config=config,
        entries=entries,
        ensemble=ensemble,
        alt_threshold=alt,
        reports=reports,
        thresholds=thresholds,
        decisions=decisions,
        diagnostics=diagnostics(manifold, test_set, test_res),
        train_features=train_feats,
        calibration_features=calib_feats,
        calibration_split=calibration_split,
        test_features=test_feats,
    )


def run_experiment(config: ExperimentConfig, entries: Optional[list[DatasetEntry]] = None, show_progress: bool = True) -> RunResult:
    async def main() -> RunResult:
        if not show_progress:
            return await run_experiment_async(config, entries=entries)
        with make_progress() as progress:
            return await run_experiment_async(config, progress=progress, entries=entries)

    return asyncio.run(main())


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def report_rows(result: RunResult) -> list[list]:
    cfg = result.config
    return [
        [r.detector, r.accuracy, r.auroc, r.fpr_at_tpr95, r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn,
         result.thresholds[r.detector], float(cfg.signal), float(operator_tau(cfg)), cfg.seed, r.config_hash]
        for r in result.reports
    ]


def write_run(out_dir: Path, result: RunResult) -> list[Path]:
    """Single writer for every run artifact."""
    paths.ensure_dirs(out_dir)
    diag_header = ["label", "count", "mean_abs_delta2", "max_abs_delta2", "mean_offset", "mean_gap_ratio"]
    return [
        write_samples(out_dir / paths.SAMPLES_FILE, result.entries),
        write_csv(out_dir / paths.REPORT_FILE, REPORT_HEADER, report_rows(result)),
        serialization.save(result.ensemble, out_dir / paths.ENSEMBLE_FILE),
        write_csv(out_dir / paths.DIAGNOSTICS_FILE, diag_header, [[d[k] for k in diag_header] for d in result.diagnostics]),
    ]


@contextmanager
def staging(out_dir: Path) -> Iterator[Path]:
    """Creates out_dir; removes it again if the block fails and it did not exist before."""
    out_dir = Path(out_dir)
    existed = out_dir.exists()
    paths.ensure_dirs(out_dir)
    try:
        yield out_dir
    except BaseException:
        if not existed:
            shutil.rmtree(out_dir, ignore_errors=True)
        raise


def print_summary(result: RunResult):
    console.print(report_table(result.reports, title=f"Test split (config {result.config_hash}, seed {result.config.seed})"))
