"""Synthetic generative manifold M ⊂ R^d.

M is an affine chart ``{μ + U z}``. Generated ("fake") samples are drawn on the
chart; real samples are pushed a controlled distance ``s`` along a direction in
the orthogonal complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.core.errors import DimensionMismatchError, InvalidInputError

ORTHONORMAL_TOL = 1e-12


class ManifoldKind(str, Enum):
    AFFINE_SUBSPACE = "affine"
    GAUSSIAN_MIXTURE_SUPPORT = "mixture"


class Label(str, Enum):
    REAL = "real"
    FAKE = "fake"

    @property
    def target(self) -> int:
        """Classifier target: fake is the positive class."""
        return 1 if self is Label.FAKE else 0


@dataclass(frozen=True, eq=False)
class ManifoldModel:
    """Affine chart μ + span(U).

    For ``GAUSSIAN_MIXTURE_SUPPORT`` the chart also carries mixture components in
    chart coordinates; on-manifold draws then follow the mixture instead of N(0, I_k).
    """

    chart_basis: np.ndarray
    offset: np.ndarray
    kind: ManifoldKind = ManifoldKind.AFFINE_SUBSPACE
    mixture_means: Optional[np.ndarray] = None
    mixture_weights: Optional[np.ndarray] = None
    mixture_sigma: float = 0.05
    normal_basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        basis = np.array(self.chart_basis, dtype=float)
        offset = np.array(self.offset, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        d, k = basis.shape
        if not 1 <= k < d:
            raise InvalidInputError(f"chart dimension k={k} must satisfy 1 <= k < d={d}")
        if offset.shape != (d,):
            raise DimensionMismatchError(d, offset.size, "offset")
        gram_error = np.max(np.abs(basis.T @ basis - np.eye(k)))
        if gram_error >= ORTHONORMAL_TOL:
            raise InvalidInputError(f"chart basis is not orthonormal (|UᵀU - I|_inf = {gram_error:.3g})")

        if self.kind is ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
            if self.mixture_means is None:
                raise InvalidInputError("mixture support needs mixture_means")
            means = np.atleast_2d(np.array(self.mixture_means, dtype=float))
            if means.shape[1] != k:
                raise DimensionMismatchError(k, means.shape[1], "mixture mean")
            weights = (
                np.full(len(means), 1.0 / len(means))
                if self.mixture_weights is None
                else np.array(self.mixture_weights, dtype=float)
            )
            if weights.shape != (len(means),) or np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
                raise InvalidInputError("mixture weights must be nonnegative and sum to 1")
            if self.mixture_sigma <= 0:
                raise InvalidInputError("mixture_sigma must be positive")
            object.__setattr__(self, "mixture_means", means)
            object.__setattr__(self, "mixture_weights", weights)
            for arr in (means, weights):
                arr.setflags(write=False)

        basis.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "chart_basis", basis)
        object.__setattr__(self, "offset", offset)
        normal = _complement_basis(basis)
        normal.setflags(write=False)
        object.__setattr__(self, "normal_basis", normal)

    @property
    def ambient_dim(self) -> int:
        return self.chart_basis.shape[0]

    @property
    def chart_dim(self) -> int:
        return self.chart_basis.shape[1]

    @classmethod
    def axis(cls, ambient_dim: int, chart_dim: int, offset: Optional[np.ndarray] = None, **kwargs) -> "ManifoldModel":
        """Chart spanned by the first ``chart_dim`` standard basis vectors."""
        basis = np.eye(ambient_dim)[:, :chart_dim]
        return cls(basis, np.zeros(ambient_dim) if offset is None else offset, **kwargs)

    @classmethod
    def random(
        cls, ambient_dim: int, chart_dim: int, rng: np.random.Generator, offset: Optional[np.ndarray] = None, **kwargs
    ) -> "ManifoldModel":
        """Chart with a Haar-random orthonormal basis."""
        q, r = np.linalg.qr(rng.standard_normal((ambient_dim, chart_dim)))
        basis = q * np.sign(np.diag(r))
        return cls(basis, np.zeros(ambient_dim) if offset is None else offset, **kwargs)

    def tangent_coords(self, x: np.ndarray) -> np.ndarray:
        """z = Uᵀ(x − μ)."""
        return self.chart_basis.T @ (_check_dim(self, x) - self.offset)

    def embed(self, z: np.ndarray) -> np.ndarray:
        """μ + U z."""
        return self.offset + self.chart_basis @ z


def _complement_basis(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(U)^⊥, built by Gram–Schmidt over e_1..e_d so an
    axis-aligned chart gets the remaining axes in order."""
    d, k = basis.shape
    columns: list[np.ndarray] = []
    for j in range(d):
        r = np.eye(d)[:, j]
        r = r - basis @ (basis.T @ r)
        for q in columns:
            r = r - q * (q @ r)
        norm = np.linalg.norm(r)
        if norm > 1e-8:
            columns.append(r / norm)
        if len(columns) == d - k:
            break
    return np.column_stack(columns)


def _check_dim(model: ManifoldModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.ambient_dim,):
        raise DimensionMismatchError(model.ambient_dim, x.size if x.ndim else 0)
    return x


@dataclass(frozen=True, eq=False)
class LabeledSample:
    point: np.ndarray
    label: Label
    signal: float
    seed_id: int = 0

    def __post_init__(self):
        if self.signal < 0:
            raise InvalidInputError("signal must be nonnegative")
        if self.label is Label.FAKE and self.signal > 1e-12:
            raise InvalidInputError("generated samples lie on the manifold (signal must be 0)")


def project(model: ManifoldModel, x: np.ndarray) -> np.ndarray:
    """Π_M(x) = μ + U Uᵀ (x − μ).

    Evaluated as x − (I − UUᵀ)(x − μ) so points already on an axis-aligned chart
    come back bit-for-bit.
    """
    x = _check_dim(model, x)
    centered = x - model.offset
    normal_part = centered - model.chart_basis @ (model.chart_basis.T @ centered)
    return x - normal_part


def distance_to_manifold(model: ManifoldModel, x: np.ndarray) -> float:
    """‖x − Π_M(x)‖₂."""
    x = _check_dim(model, x)
    return float(np.linalg.norm(x - project(model, x)))


def _draw_chart_coords(model: ManifoldModel, rng: np.random.Generator) -> np.ndarray:
    k = model.chart_dim
    if model.kind is ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
        component = rng.choice(len(model.mixture_means), p=model.mixture_weights)
        return model.mixture_means[component] + model.mixture_sigma * rng.standard_normal(k)
    return rng.standard_normal(k)


def sample_fake(model: ManifoldModel, rng: np.random.Generator, seed_id: int = 0) -> LabeledSample:
    """On-manifold draw: μ + U z."""
    point = model.embed(_draw_chart_coords(model, rng))
    return LabeledSample(point=point, label=Label.FAKE, signal=0.0, seed_id=seed_id)


def normal_direction(
    model: ManifoldModel, rng: Optional[np.random.Generator] = None, randomize: bool = False
) -> np.ndarray:
    """Unit vector in span(U)^⊥: the first complement axis, or an isotropic draw."""
    if not randomize:
        return model.normal_basis[:, 0]
    if rng is None:
        raise InvalidInputError("a randomized normal direction needs an rng")
    coeffs = rng.standard_normal(model.normal_basis.shape[1])
    return model.normal_basis @ (coeffs / np.linalg.norm(coeffs))


def sample_real(
    model: ManifoldModel,
    s: float,
    rng: np.random.Generator,
    *,
    direction: Optional[np.ndarray] = None,
    randomize_direction: bool = False,
    seed_id: int = 0,
) -> LabeledSample:
    """On-manifold draw pushed off M by s along a unit normal direction."""
    if s < 0:
        raise InvalidInputError(f"signal strength must be nonnegative, got {s}")
    base = model.embed(_draw_chart_coords(model, rng))
    if direction is None:
        direction = normal_direction(model, rng, randomize_direction)
    else:
        direction = _check_dim(model, direction)
        if np.linalg.norm(model.chart_basis.T @ direction) > 1e-12 or not np.isclose(np.linalg.norm(direction), 1.0):
            raise InvalidInputError("direction must be a unit vector orthogonal to the chart")
    return LabeledSample(point=base + s * direction, label=Label.REAL, signal=float(s), seed_id=seed_id)
