"""Branch classifiers fused by a shared probability threshold.

Scores are predicted probabilities of *fake*; a branch calls a sample real when
its score is below the threshold c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from src.core.detector.classifier import LogisticClassifier
from src.core.errors import CalibrationError, InvalidInputError
from src.core.manifold import Label
from src.core.residuals import Branch


class Fusion(str, Enum):
    AND_REAL = "and-real"
    AND_FAKE = "and-fake"
    MAX_SCORE = "max-score"


def analytic_threshold(target: float = 0.5) -> float:
    """Per-branch threshold 1 − √(1 − target); 0.5 gives 1 − √0.5 ≈ 0.2929."""
    _check_probability(target)
    return 1.0 - math.sqrt(1.0 - target)


def neutral_threshold(target: float = 0.5) -> float:
    """√target: with independent uniform real scores the AND-on-real gate then accepts a
    real sample with probability target, the same as one branch thresholded at target."""
    _check_probability(target)
    return math.sqrt(target)


def percentile_threshold(real_scores: Sequence[float], percentile: float = 95.0) -> float:
    """Linear interpolation between order statistics at position (n − 1)·p/100."""
    scores = np.asarray(real_scores, dtype=float).ravel()
    if scores.size == 0:
        raise CalibrationError("percentile calibration needs at least one real score")
    if not 0 <= percentile <= 100:
        raise CalibrationError(f"percentile must lie in [0, 100], got {percentile}")
    return float(np.percentile(scores, percentile, method="linear"))


def _check_probability(target: float):
    if not 0 < target < 1:
        raise CalibrationError(f"target rate must lie in (0, 1), got {target}")


def clamp_open_unit(c: float) -> float:
    """Nudges a calibrated threshold into (0, 1)."""
    return float(min(max(c, np.nextafter(0.0, 1.0)), np.nextafter(1.0, 0.0)))


@dataclass(frozen=True)
class ScorePair:
    """Per-branch fake probabilities; p3 is set only for the third-order detector."""

    p1: float
    p2: float
    p3: Optional[float] = None

    def __post_init__(self):
        for p in self.values:
            if not 0.0 <= p <= 1.0:
                raise InvalidInputError(f"scores must lie in [0, 1], got {p}")

    @property
    def values(self) -> tuple[float, ...]:
        return (self.p1, self.p2) if self.p3 is None else (self.p1, self.p2, self.p3)


def fake_mask(scores: np.ndarray, threshold: float, fusion: Fusion) -> np.ndarray:
    """Vectorised decision over an (n, branches) score matrix; True means fake."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    if fusion is Fusion.AND_FAKE:
        return np.all(scores >= threshold, axis=1)
    # AND on real and the max statistic agree: max < c  ⇔  every score < c.
    return ~np.all(scores < threshold, axis=1)


def fused_score(scores: np.ndarray, fusion: Fusion) -> np.ndarray:
    """Single score per row that is thresholded the same way as the branches."""
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    return scores.min(axis=1) if fusion is Fusion.AND_FAKE else scores.max(axis=1)


@dataclass(frozen=True, eq=False)
class DetectorEnsemble:
    classifiers: Mapping[Branch, LogisticClassifier]
    threshold: float = field(default_factory=analytic_threshold)
    fusion: Fusion = Fusion.AND_REAL

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise InvalidInputError(f"threshold must lie in (0, 1), got {self.threshold}")
        if Branch.DELTA1 not in self.classifiers or Branch.DELTA2 not in self.classifiers:
            raise InvalidInputError("an ensemble needs both the first- and second-order classifiers")
        ordered = {b: self.classifiers[b] for b in Branch if b in self.classifiers}
        object.__setattr__(self, "classifiers", ordered)

    @property
    def clf_delta1(self) -> LogisticClassifier:
        return self.classifiers[Branch.DELTA1]

    @property
    def clf_delta2(self) -> LogisticClassifier:
        return self.classifiers[Branch.DELTA2]

    @property
    def branches(self) -> tuple[Branch, ...]:
        return tuple(self.classifiers)

    def with_threshold(self, threshold: float) -> "DetectorEnsemble":
        return DetectorEnsemble(self.classifiers, threshold, self.fusion)

    def score_matrix(self, features: Mapping[Branch, np.ndarray], branches: Optional[Sequence[Branch]] = None) -> np.ndarray:
        """(n, len(branches)) fake probabilities from per-branch feature matrices."""
        branches = tuple(branches or self.branches)
        return np.column_stack([self.classifiers[b].predict_many(features[b]) for b in branches])

    def score(self, features: Mapping[Branch, np.ndarray]) -> ScorePair:
        present = [b for b in self.branches if b in features]
        row = self.score_matrix({b: np.atleast_2d(features[b]) for b in present}, present)[0]
        return ScorePair(*(float(p) for p in row))

    def predict(self, features: Mapping[Branch, np.ndarray], branches: Optional[Sequence[Branch]] = None) -> np.ndarray:
        """Boolean fake mask over the rows of the feature matrices."""
        return fake_mask(self.score_matrix(features, branches), self.threshold, self.fusion)


def decide(ens: DetectorEnsemble, scores: ScorePair) -> Label:
    fake = fake_mask(np.array([scores.values]), ens.threshold, ens.fusion)[0]
    return Label.FAKE if fake else Label.REAL
