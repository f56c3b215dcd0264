"""Analytic reconstruction R(x) = Π_M(x) + δ(x).

δ splits into a deterministic bias field f evaluated at the projection, fresh
tangent noise, and an optional leak into the normal space.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.core.errors import DimensionMismatchError, InvalidInputError
from src.core.manifold import ManifoldModel, distance_to_manifold, project


class BiasKind(str, Enum):
    CONSTANT = "constant"
    SINUSOIDAL = "sinusoidal"


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def default_carrier(chart_dim: int) -> np.ndarray:
    """Normalised all-ones vector in chart coordinates."""
    return np.full(chart_dim, 1.0 / np.sqrt(chart_dim))


def default_modulator(chart_dim: int) -> np.ndarray:
    """Alternating-sign chart vector made orthogonal to the carrier (zero when k = 1)."""
    alternating = np.where(np.arange(chart_dim) % 2 == 0, 1.0, -1.0)
    carrier = default_carrier(chart_dim)
    return _unit(alternating - carrier * (carrier @ alternating))


@dataclass(frozen=True, eq=False)
class PerturbationModel:
    """δ(x) = f(Π(x)) + τ·η_tan + λ·η_norm.

    The sinusoidal field is a shear: f(p) = a(t)·U u with t = ⟨c, Uᵀ(p − μ)⟩ and
    c ⊥ u, so moving p along f leaves t (and therefore f) unchanged.
    """

    kind: BiasKind = BiasKind.CONSTANT
    beta: float = 1.0
    carrier: Optional[np.ndarray] = None
    modulator: Optional[np.ndarray] = None
    amplitude_swing: float = 0.5
    frequency: float = 1.0
    phase: float = 0.0
    fresh_noise_scale: float = 0.0
    normal_leak: float = 0.0
    offmanifold_noise_gain: float = 0.0

    def __post_init__(self):
        if self.fresh_noise_scale < 0 or self.normal_leak < 0 or self.offmanifold_noise_gain < 0:
            raise InvalidInputError("noise scales must be nonnegative")
        if self.beta < 0:
            raise InvalidInputError("bias magnitude beta must be nonnegative")
        if not 0 <= self.amplitude_swing < 1:
            raise InvalidInputError("amplitude_swing must lie in [0, 1)")

    def carrier_coords(self, model: ManifoldModel) -> np.ndarray:
        if self.carrier is None:
            return default_carrier(model.chart_dim)
        u = np.asarray(self.carrier, dtype=float)
        if u.shape != (model.chart_dim,):
            raise DimensionMismatchError(model.chart_dim, u.size, "carrier")
        return _unit(u)

    def modulator_coords(self, model: ManifoldModel) -> np.ndarray:
        u = self.carrier_coords(model)
        c = default_modulator(model.chart_dim) if self.modulator is None else np.asarray(self.modulator, dtype=float)
        if c.shape != (model.chart_dim,):
            raise DimensionMismatchError(model.chart_dim, c.size, "modulator")
        return _unit(c - u * (u @ c))

    def amplitude(self, model: ManifoldModel, p: np.ndarray) -> float:
        if self.kind is BiasKind.CONSTANT:
            return self.beta
        t = self.modulator_coords(model) @ model.tangent_coords(p)
        return self.beta * (1.0 + self.amplitude_swing * np.sin(self.frequency * t + self.phase))

    def bias(self, model: ManifoldModel, p: np.ndarray) -> np.ndarray:
        """f(p), always inside span(U)."""
        return model.chart_basis @ (self.amplitude(model, p) * self.carrier_coords(model))

    def noise_scale(self, off_manifold_distance: float) -> float:
        return self.fresh_noise_scale * (1.0 + self.offmanifold_noise_gain * off_manifold_distance)

    @property
    def is_deterministic(self) -> bool:
        return self.fresh_noise_scale == 0 and self.normal_leak == 0


def reconstruct_analytic(
    model: ManifoldModel, pert: PerturbationModel, x: np.ndarray, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """Π_M(x) + f(Π_M(x)) + τ·η_tan + λ·η_norm.

    Draws tangent noise first, then normal noise; nothing is drawn when a scale is 0.
    """
    p = project(model, x)
    out = p + pert.bias(model, p)
    tau = pert.noise_scale(distance_to_manifold(model, x)) if pert.offmanifold_noise_gain else pert.fresh_noise_scale
    if tau > 0 or pert.normal_leak > 0:
        if rng is None:
            raise InvalidInputError("a stochastic perturbation needs an rng")
    if tau > 0:
        out = out + model.chart_basis @ (tau * rng.standard_normal(model.chart_dim))
    if pert.normal_leak > 0:
        out = out + model.normal_basis @ (pert.normal_leak * rng.standard_normal(model.normal_basis.shape[1]))
    return out
