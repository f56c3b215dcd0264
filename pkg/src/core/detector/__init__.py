from .classifier import LogisticClassifier, TrainingSettings, gradient, loss, train
from .ensemble import (
    DetectorEnsemble,
    Fusion,
    ScorePair,
    analytic_threshold,
    decide,
    fake_mask,
    fused_score,
    neutral_threshold,
    percentile_threshold,
)
from .serialization import load, save
