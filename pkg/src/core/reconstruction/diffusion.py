"""Toy DDIM with an exact Gaussian-mixture score.

Forward marginal of a mixture Σ w_k N(μ_k, σ₀² I) under x_t = √ᾱ_t x₀ + √(1 − ᾱ_t) ε
is Σ w_k N(√ᾱ_t μ_k, (ᾱ_t σ₀² + 1 − ᾱ_t) I), so the noise predictor is available in
closed form and inversion/reconstruction run without any learned network.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy.special import softmax

from src.core.errors import DimensionMismatchError, InvalidInputError, ScheduleError
from src.core.manifold import ManifoldKind, ManifoldModel

EpsFn = Callable[[np.ndarray, int], np.ndarray]

TRAIN_STEPS = 1000


class Direction(str, Enum):
    REVERSE = "reverse"
    INVERT = "invert"


@dataclass(frozen=True, eq=False)
class DiffusionSchedule:
    """Cumulative weights ᾱ_0..ᾱ_T with ᾱ_0 = 1."""

    alpha_bars: np.ndarray
    eta: float = 0.0
    strict: bool = True

    def __post_init__(self):
        ab = np.asarray(self.alpha_bars, dtype=float)
        if ab.ndim != 1 or ab.size < 2:
            raise ScheduleError("a schedule needs ᾱ_0 and at least one step")
        if ab[0] != 1.0:
            raise ScheduleError("ᾱ_0 must be 1")
        if np.any(ab[1:] <= 0) or np.any(ab[1:] >= 1):
            raise ScheduleError("ᾱ_t must lie in (0, 1) for t >= 1")
        steps = np.diff(ab)
        if self.strict and np.any(steps >= 0):
            raise ScheduleError("ᾱ_t must be strictly decreasing")
        if np.any(steps > 0):
            raise ScheduleError("ᾱ_t must be non-increasing")
        if self.eta != 0:
            raise ScheduleError("only deterministic sampling (eta = 0) is supported")
        ab.setflags(write=False)
        object.__setattr__(self, "alpha_bars", ab)

    @classmethod
    def linear(
        cls, steps: int = 20, beta_start: float = 1e-4, beta_end: float = 0.02, train_steps: int = TRAIN_STEPS
    ) -> "DiffusionSchedule":
        """Linear β over ``train_steps``, respaced to ``steps`` evenly strided timesteps."""
        if not 1 <= steps <= train_steps:
            raise ScheduleError(f"step count must lie in [1, {train_steps}], got {steps}")
        betas = np.linspace(beta_start, beta_end, train_steps)
        base = np.cumprod(1.0 - betas)
        stride = train_steps // steps
        picked = base[np.arange(steps) * stride]
        return cls(np.concatenate([[1.0], picked]))

    @property
    def steps(self) -> int:
        return self.alpha_bars.size - 1

    @property
    def alphas(self) -> np.ndarray:
        """Per-step α_t = ᾱ_t / ᾱ_{t-1}, t = 1..T."""
        return self.alpha_bars[1:] / self.alpha_bars[:-1]

    def alpha_bar(self, t: int) -> float:
        if not 0 <= t <= self.steps:
            raise ScheduleError(f"timestep {t} outside [0, {self.steps}]")
        return float(self.alpha_bars[t])

    def check_step(self, t: int):
        if not 1 <= t <= self.steps:
            raise ScheduleError(f"timestep {t} outside [1, {self.steps}]")


@dataclass(frozen=True, eq=False)
class GmmScoreModel:
    """Isotropic mixture Σ w_k N(μ_k, σ₀² I) in ambient coordinates."""

    weights: np.ndarray
    means: np.ndarray
    sigma0: float = 0.05

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if means.shape[0] < 1:
            raise InvalidInputError("a mixture needs at least one component")
        if weights.shape != (means.shape[0],) or np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
            raise InvalidInputError("mixture weights must be nonnegative, one per component, summing to 1")
        if self.sigma0 <= 0:
            raise InvalidInputError("sigma0 must be positive")
        for arr in (means, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @classmethod
    def from_manifold(cls, model: ManifoldModel) -> "GmmScoreModel":
        if model.kind is not ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
            raise InvalidInputError("the diffusion operator needs a manifold with mixture support")
        means = np.stack([model.embed(m) for m in model.mixture_means])
        return cls(model.mixture_weights, means, model.mixture_sigma)

    @classmethod
    def standard_normal(cls, dim: int) -> "GmmScoreModel":
        """Single N(0, I) component; its forward marginal is N(0, I) at every t."""
        return cls(np.ones(1), np.zeros((1, dim)), 1.0)


def exact_eps(gmm: GmmScoreModel, sched: DiffusionSchedule, x_t: np.ndarray, t: int) -> np.ndarray:
    """−√(1 − ᾱ_t) ∇ log p_t(x_t) for the mixture's forward marginal."""
    sched.check_step(t)
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape != (gmm.dim,):
        raise DimensionMismatchError(gmm.dim, x_t.size)
    ab = sched.alpha_bar(t)
    var = ab * gmm.sigma0**2 + 1.0 - ab
    diffs = np.sqrt(ab) * gmm.means - x_t
    with np.errstate(divide="ignore"):
        logits = np.log(gmm.weights) - np.sum(diffs**2, axis=1) / (2.0 * var)
    responsibilities = softmax(logits)
    score = responsibilities @ diffs / var
    return -np.sqrt(1.0 - ab) * score


def ddim_step(
    sched: DiffusionSchedule, eps_fn: EpsFn, x: np.ndarray, t: int, direction: Direction = Direction.REVERSE
) -> np.ndarray:
    """One deterministic DDIM update between levels t−1 and t.

    REVERSE maps x_t to x_{t−1}; INVERT maps x_{t−1} to x_t, reusing ε̂ evaluated at
    the current state with timestep t.
    """
    sched.check_step(t)
    ab_t, ab_prev = sched.alpha_bar(t), sched.alpha_bar(t - 1)
    if ab_t <= 0 or ab_prev <= 0:
        raise ScheduleError("ᾱ must be positive")
    eps = eps_fn(x, t)
    if direction is Direction.REVERSE:
        x0 = (x - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t)
        return np.sqrt(ab_prev) * x0 + np.sqrt(1.0 - ab_prev) * eps
    x0 = (x - np.sqrt(1.0 - ab_prev) * eps) / np.sqrt(ab_prev)
    return np.sqrt(ab_t) * x0 + np.sqrt(1.0 - ab_t) * eps


def ddim_invert(sched: DiffusionSchedule, eps_fn: EpsFn, x: np.ndarray) -> np.ndarray:
    for t in range(1, sched.steps + 1):
        x = ddim_step(sched, eps_fn, x, t, Direction.INVERT)
    return x


def ddim_sample(sched: DiffusionSchedule, eps_fn: EpsFn, latent: np.ndarray) -> np.ndarray:
    x = latent
    for t in range(sched.steps, 0, -1):
        x = ddim_step(sched, eps_fn, x, t, Direction.REVERSE)
    return x


def reconstruct_ddim(
    gmm: GmmScoreModel, sched: DiffusionSchedule, x: np.ndarray, eps_fn: Optional[EpsFn] = None
) -> np.ndarray:
    """Invert x through t = 1..T, then sample back T..1."""
    x = np.asarray(x, dtype=float)
    if x.shape != (gmm.dim,):
        raise DimensionMismatchError(gmm.dim, x.size)
    eps_fn = eps_fn or partial(exact_eps, gmm, sched)
    return ddim_sample(sched, eps_fn, ddim_invert(sched, eps_fn, x))


def reverse_multiplier(sched: DiffusionSchedule, t: int) -> float:
    """Scalar reverse-step map for the N(0, I) model: √(ᾱ_{t−1}ᾱ_t) + √((1−ᾱ_{t−1})(1−ᾱ_t))."""
    ab_t, ab_prev = sched.alpha_bar(t), sched.alpha_bar(t - 1)
    return np.sqrt(ab_prev * ab_t) + np.sqrt((1.0 - ab_prev) * (1.0 - ab_t))
