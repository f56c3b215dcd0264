"""Detection metrics. Fake is the positive class throughout."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.stats import rankdata

from src.core.errors import DimensionMismatchError, InvalidInputError, UndefinedMetricError


def _as_targets(labels: Sequence) -> np.ndarray:
    """Accepts 0/1 targets, booleans, or Label members."""
    return np.array([getattr(v, "target", v) for v in labels], dtype=int)


def _paired(scores: Sequence, labels: Sequence) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float).ravel()
    y = _as_targets(labels)
    if s.size != y.size:
        raise DimensionMismatchError(y.size, s.size, "score vector")
    if s.size == 0:
        raise InvalidInputError("metrics need at least one sample")
    if np.any(np.isnan(s)):
        raise InvalidInputError("scores contain NaN")
    if y.min() == y.max():
        raise UndefinedMetricError("both classes must be present")
    return s, y


def accuracy(decisions: Sequence, labels: Sequence) -> float:
    d, y = _as_targets(decisions), _as_targets(labels)
    if d.size != y.size:
        raise DimensionMismatchError(y.size, d.size, "decision vector")
    if d.size == 0:
        raise InvalidInputError("accuracy needs at least one sample")
    return float(np.mean(d == y))


def auroc(scores: Sequence, labels: Sequence) -> float:
    """Mann–Whitney U / (n_fake · n_real) with midranks, so ties count one half."""
    s, y = _paired(scores, labels)
    ranks = rankdata(s, method="average")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def fpr_at_tpr(scores: Sequence, labels: Sequence, tpr_target: float = 0.95) -> float:
    """Smallest FPR over thresholds (observed scores and ±inf) whose TPR reaches the target.

    A sample is called fake when its score is at or above the threshold.
    """
    if not 0 <= tpr_target <= 1:
        raise InvalidInputError(f"tpr_target must lie in [0, 1], got {tpr_target}")
    s, y = _paired(scores, labels)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # counts at each distinct score, descending; +inf calls nothing
    last = np.append(s[1:] != s[:-1], True)
    tpr = np.append(0.0, np.cumsum(y == 1)[last] / np.sum(y == 1))
    fpr = np.append(0.0, np.cumsum(y == 0)[last] / np.sum(y == 0))
    return float(fpr[tpr >= tpr_target].min())


class ConfusionCounts(BaseModel):
    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def tally(cls, decisions: Sequence, labels: Sequence) -> "ConfusionCounts":
        d, y = _as_targets(decisions), _as_targets(labels)
        if d.size != y.size:
            raise DimensionMismatchError(y.size, d.size, "decision vector")
        return cls(
            tp=int(np.sum((d == 1) & (y == 1))),
            fp=int(np.sum((d == 1) & (y == 0))),
            tn=int(np.sum((d == 0) & (y == 0))),
            fn=int(np.sum((d == 0) & (y == 1))),
        )


class EvalReport(BaseModel):
    detector: str = Field(description="Which detector produced the decisions.")
    accuracy: float = Field(ge=0, le=1)
    auroc: Optional[float] = Field(None, ge=0, le=1, description="None when only one class was evaluated.")
    fpr_at_tpr95: Optional[float] = Field(None, ge=0, le=1)
    counts: ConfusionCounts
    config_hash: str = ""
    seed: int = 0

    @model_validator(mode="after")
    def _consistent(self) -> "EvalReport":
        total = self.counts.total
        if total == 0:
            raise ValueError("a report needs at least one sample")
        if abs(self.accuracy - (self.counts.tp + self.counts.tn) / total) > 1e-12:
            raise ValueError("accuracy disagrees with the confusion counts")
        return self

    @classmethod
    def evaluate(
        cls, detector: str, decisions: Sequence, scores: Sequence, labels: Sequence, config_hash: str = "", seed: int = 0
    ) -> "EvalReport":
        counts = ConfusionCounts.tally(decisions, labels)
        try:
            auc, fpr = auroc(scores, labels), fpr_at_tpr(scores, labels, 0.95)
        except UndefinedMetricError:
            auc, fpr = None, None
        return cls(
            detector=detector,
            accuracy=(counts.tp + counts.tn) / counts.total if counts.total else 0.0,
            auroc=auc,
            fpr_at_tpr95=fpr,
            counts=counts,
            config_hash=config_hash,
            seed=seed,
        )
