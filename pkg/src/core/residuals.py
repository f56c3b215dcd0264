"""First-, second- and third-order reconstruction residuals and their summary features."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.core.errors import DimensionMismatchError, InvalidInputError, MissingReconstructionError
from src.core.reconstruction.trace import ReconstructionTrace

QUANTILES = (0.5, 0.9, 0.99)


class Branch(str, Enum):
    DELTA1 = "delta1"
    DELTA2 = "delta2"
    DELTA3 = "delta3"


def feature_layout(branch: Branch) -> tuple[str, ...]:
    """Slot names, bias first. Statistics are taken over |component values|; l1_dev is their mean absolute deviation."""
    layout = ("bias", "mean", "std", "l1_dev", "max", *(f"q{round(q * 100)}" for q in QUANTILES))
    if branch is Branch.DELTA2:
        layout += ("signed_mean",)
    return layout


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    branch: Branch

    @property
    def layout(self) -> tuple[str, ...]:
        return feature_layout(self.branch)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class ResidualSet:
    delta1: np.ndarray
    delta2: np.ndarray
    delta3: Optional[np.ndarray] = None
    trace_id: int = 0

    def branch(self, branch: Branch) -> np.ndarray:
        if branch is Branch.DELTA3 and self.delta3 is None:
            raise MissingReconstructionError("third-order residual needs a third reconstruction")
        return {Branch.DELTA1: self.delta1, Branch.DELTA2: self.delta2, Branch.DELTA3: self.delta3}[branch]


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(a.size, b.size)
    return a, b


def first_order(x: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """Δ(x) = |x − x′| elementwise."""
    x, x1 = _pair(x, x1)
    return np.abs(x - x1)


def _second(x: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    return first_order(x, x1) - first_order(x1, x2)


def second_order(trace: ReconstructionTrace) -> np.ndarray:
    """Δ²(x) = |x − x′| − |x′ − x″|, kept signed."""
    return _second(trace.x, trace.x1, trace.x2)


def third_order(trace: ReconstructionTrace) -> np.ndarray:
    """Δ³(x) = |Δ²(x) − Δ²(x′)| with Δ²(x′) = |x′ − x″| − |x″ − x‴|."""
    if trace.x3 is None:
        raise MissingReconstructionError("third-order difference needs x‴ = R(x″)")
    return np.abs(second_order(trace) - _second(trace.x1, trace.x2, trace.x3))


def residual_set(trace: ReconstructionTrace) -> ResidualSet:
    return ResidualSet(
        delta1=first_order(trace.x, trace.x1),
        delta2=second_order(trace),
        delta3=third_order(trace) if trace.x3 is not None else None,
        trace_id=trace.seed_id,
    )


def summarize_many(residuals: np.ndarray, branch: Branch) -> np.ndarray:
    """Row-wise features for a (n, d) stack of residuals; quantiles interpolate order statistics linearly."""
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    if residuals.shape[1] == 0:
        raise InvalidInputError("cannot summarize an empty residual")
    if not np.all(np.isfinite(residuals)):
        raise InvalidInputError("residual contains non-finite values")
    mags = np.abs(residuals)
    columns = [
        np.ones(len(mags)),
        mags.mean(axis=1),
        mags.std(axis=1),
        np.abs(mags - mags.mean(axis=1, keepdims=True)).mean(axis=1),
        mags.max(axis=1),
        *np.quantile(mags, QUANTILES, axis=1, method="linear"),
    ]
    if branch is Branch.DELTA2:
        columns.append(residuals.mean(axis=1))
    return np.column_stack(columns)


def summarize(residual: np.ndarray, branch: Branch) -> FeatureVector:
    residual = np.asarray(residual, dtype=float)
    if residual.ndim != 1 or residual.size == 0:
        raise InvalidInputError("cannot summarize an empty residual")
    return FeatureVector(values=summarize_many(residual[None, :], branch)[0], branch=branch)
