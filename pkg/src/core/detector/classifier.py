"""Logistic regression on residual summary features, trained by full-batch gradient descent."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from src.core.errors import CalibrationError, DimensionMismatchError, InvalidInputError

MIN_LEARNING_RATE = 1e-12


class TrainingSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    learning_rate: float = Field(0.1, gt=0, description="Initial gradient step; halved whenever a step would raise the loss.")
    iterations: int = Field(2000, ge=1, description="Number of gradient iterations.")
    l2: float = Field(1e-4, ge=0, description="L2 strength on every weight except the bias slot.")
    standardize: bool = Field(True, description="Center and scale non-bias features on the training rows.")


def _penalty_mask(n_features: int) -> np.ndarray:
    mask = np.ones(n_features)
    mask[0] = 0.0
    return mask


def loss(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> float:
    """−(1/N) Σ [y log σ(z) + (1−y) log(1−σ(z))] + (l2/2)‖w₁..‖², z = Xw."""
    z = X @ w
    data_term = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(data_term + 0.5 * l2 * np.sum((w * _penalty_mask(w.size)) ** 2))


def gradient(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> np.ndarray:
    return X.T @ (expit(X @ w) - y) / len(y) + l2 * w * _penalty_mask(w.size)


class LogisticClassifier:
    """
    sigmoid(wᵀφ̃) where φ̃ is φ standardized with the stored center/scale.
    Slot 0 of every feature vector is the constant bias feature.
    """

    def __init__(
        self,
        weights: np.ndarray,
        center: Optional[np.ndarray] = None,
        scale: Optional[np.ndarray] = None,
        settings: Optional[TrainingSettings] = None,
        layout: Sequence[str] = (),
    ):
        weights = np.array(weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise InvalidInputError("weights must be a nonempty vector")
        if not np.all(np.isfinite(weights)):
            raise InvalidInputError("weights must be finite")
        n = weights.size
        self.weights = weights
        self.center = np.zeros(n) if center is None else np.array(center, dtype=float)
        self.scale = np.ones(n) if scale is None else np.array(scale, dtype=float)
        if self.center.shape != (n,) or self.scale.shape != (n,):
            raise DimensionMismatchError(n, max(self.center.size, self.scale.size), "scaling")
        if np.any(self.scale <= 0):
            raise InvalidInputError("feature scales must be positive")
        self.settings = settings or TrainingSettings()
        self.layout = tuple(layout)
        self.loss_history: list[float] = []
        for arr in (self.weights, self.center, self.scale):
            arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.weights.size

    @classmethod
    def zeros(cls, n_features: int, settings: Optional[TrainingSettings] = None) -> "LogisticClassifier":
        return cls(np.zeros(n_features), settings=settings)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(self.n_features, X.shape[1], "feature vector")
        return (X - self.center) / self.scale

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return expit(self.transform(X) @ self.weights)

    def predict(self, phi: np.ndarray) -> float:
        phi = np.asarray(phi, dtype=float)
        if phi.ndim != 1:
            raise InvalidInputError("predict takes a single feature vector")
        return float(self.predict_many(phi)[0])


def fit_scaling(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and standard deviation; the bias slot and constant columns keep (0, 1)."""
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    center[0], scale[0] = 0.0, 1.0
    constant = scale < 1e-12
    center[constant] = 0.0
    scale[constant] = 1.0
    return center, scale


def train(
    features: np.ndarray,
    labels: np.ndarray,
    settings: Optional[TrainingSettings] = None,
    layout: Sequence[str] = (),
) -> LogisticClassifier:
    """Gradient descent from w = 0; a step that would increase the loss is rejected and the rate halved."""
    settings = settings or TrainingSettings()
    X = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(labels, dtype=float).ravel()
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise InvalidInputError("training needs at least one nonempty feature vector")
    if X.shape[0] != y.size:
        raise DimensionMismatchError(X.shape[0], y.size, "label vector")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("features contain NaN or infinite values")
    if not np.all((y == 0) | (y == 1)):
        raise InvalidInputError("labels must be 0 (real) or 1 (fake)")
    if np.unique(y).size < 2:
        raise CalibrationError("training data holds a single class")

    center, scale = fit_scaling(X) if settings.standardize else (np.zeros(X.shape[1]), np.ones(X.shape[1]))
    Xs = (X - center) / scale

    w = np.zeros(X.shape[1])
    lr = settings.learning_rate
    current = loss(w, Xs, y, settings.l2)
    history = [current]
    for _ in range(settings.iterations):
        candidate = w - lr * gradient(w, Xs, y, settings.l2)
        value = loss(candidate, Xs, y, settings.l2)
        if value > current:
            lr /= 2.0
            if lr < MIN_LEARNING_RATE:
                break
            continue
        w, current = candidate, value
        history.append(current)

    clf = LogisticClassifier(w, center, scale, settings, layout)
    clf.loss_history = history
    return clf
