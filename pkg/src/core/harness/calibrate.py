"""Compares threshold calibration rules for the fused detector on held-out data."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from src.core import paths
from src.core.detector.ensemble import (
    analytic_threshold,
    clamp_open_unit,
    fake_mask,
    fused_score,
    neutral_threshold,
    percentile_threshold,
)
from src.core.harness.config import ExperimentConfig
from src.core.harness.dataset import Split, select
from src.core.harness.pipeline import RunResult, targets, write_csv
from src.core.residuals import Branch

CALIBRATION_HEADER = ["rule", "threshold", "fpr", "tpr", "fusion"]


def rates(fake: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """(false-positive rate, true-positive rate) with fake as the positive class."""
    return float(fake[y == 0].mean()), float(fake[y == 1].mean())


def calibration_rows(config: ExperimentConfig, result: RunResult) -> list[list]:
    """Printed, neutral and percentile thresholds, each with its test-split FPR and TPR.

    The percentile rule is fitted on the fused scores of the calibration reals only.
    """
    ens = result.ensemble
    section = config.threshold
    pair = [Branch.DELTA1, Branch.DELTA2]

    y_calib = targets(select(result.entries, result.calibration_split))
    calib_fused = fused_score(ens.score_matrix(result.calibration_features, pair), section.fusion)
    y_test = targets(select(result.entries, Split.TEST))
    test_scores = ens.score_matrix(result.test_features, pair)

    rules = {
        "printed": analytic_threshold(section.target),
        "neutral": neutral_threshold(section.target),
        f"percentile-{section.percentile:g}": clamp_open_unit(
            percentile_threshold(calib_fused[y_calib == 0], section.percentile)
        ),
        "configured": ens.threshold,
    }
    rows = []
    for rule, c in rules.items():
        fpr, tpr = rates(fake_mask(test_scores, c, section.fusion), y_test)
        rows.append([rule, float(c), fpr, tpr, section.fusion.value])
    return rows


def write_calibration(out_dir: Path, rows: list[list]) -> Path:
    paths.ensure_dirs(out_dir)
    return write_csv(out_dir / paths.CALIBRATION_FILE, CALIBRATION_HEADER, rows)
