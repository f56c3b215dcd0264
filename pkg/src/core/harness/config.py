"""Experiment configuration: nested pydantic sections read from TOML or JSON."""

from __future__ import annotations

import hashlib
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.detector.classifier import TrainingSettings
from src.core.detector.ensemble import Fusion
from src.core.errors import ConfigError
from src.core.manifold import ManifoldKind
from src.core.paths import DEFAULT_THREADS
from src.core.reconstruction.analytic import BiasKind
from src.plugins.operators.analytic.config import AnalyticConfig
from src.plugins.operators.ddim.config import DdimConfig


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ManifoldSection(Section):
    ambient_dim: int = Field(16, ge=2, description="Ambient dimension d.")
    chart_dim: int = Field(8, ge=1, description="Chart dimension k, 1 <= k < d.")
    chart: str = Field("axis", pattern="^(axis|random)$", description="Axis-aligned chart or a Haar-random one.")
    kind: ManifoldKind = Field(ManifoldKind.AFFINE_SUBSPACE, description="Plain affine chart or mixture support.")
    offset: Optional[list[float]] = Field(None, description="Chart offset μ; zero when omitted.")
    seed: int = Field(0, description="Seed for the random chart.")
    mixture_components: int = Field(4, ge=1, description="Number of mixture components placed at ±radius·e_j.")
    mixture_radius: float = Field(3.0, gt=0, description="Distance of each mixture mean from the chart origin.")
    mixture_sigma: float = Field(0.05, gt=0, description="Per-component standard deviation σ₀.")
    randomize_direction: bool = Field(False, description="Draw each real sample's normal direction isotropically.")

    @model_validator(mode="after")
    def _dims(self) -> "ManifoldSection":
        if self.chart_dim >= self.ambient_dim:
            raise ValueError(f"chart_dim ({self.chart_dim}) must be smaller than ambient_dim ({self.ambient_dim})")
        if self.offset is not None and len(self.offset) != self.ambient_dim:
            raise ValueError(f"offset has {len(self.offset)} entries, expected {self.ambient_dim}")
        return self


class OperatorSection(Section):
    name: str = Field("analytic", description="Reconstruction operator plugin.")
    analytic: AnalyticConfig = Field(
        default_factory=lambda: AnalyticConfig(bias_kind=BiasKind.SINUSOIDAL, tau=0.05),
        description="Settings for the analytic operator.",
    )
    ddim: DdimConfig = Field(default_factory=DdimConfig, description="Settings for the DDIM operator.")

    def settings(self):
        return getattr(self, self.name, None)


class CountsSection(Section):
    train_per_class: int = Field(2000, gt=0, description="Training samples per class.")
    val_per_class: int = Field(0, ge=0, description="Validation samples per class; when nonzero, percentile thresholds are fitted on its reals.")
    test_per_class: int = Field(2000, gt=0, description="Test samples per class.")


class DetectorSection(Section):
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    third_order: bool = Field(False, description="Also reconstruct x‴ and report the three-branch detector.")


class ThresholdMode(str, Enum):
    PRINTED = "printed"
    NEUTRAL = "neutral"
    PERCENTILE = "percentile"
    FIXED = "fixed"


class ThresholdSection(Section):
    mode: ThresholdMode = Field(ThresholdMode.PRINTED, description="How the shared branch threshold c is chosen.")
    target: float = Field(0.5, gt=0, lt=1, description="Single-classifier threshold the analytic rules start from.")
    percentile: float = Field(95.0, ge=0, le=100, description="Percentile of calibration real scores in percentile mode.")
    fixed: float = Field(0.5, gt=0, lt=1, description="Threshold used in fixed mode.")
    fusion: Fusion = Field(Fusion.AND_REAL, description="How branch decisions are combined.")


class SweepSection(Section):
    signals: list[float] = Field([1.0, 0.5, 0.2, 0.1, 0.05], min_length=1, description="Signal strengths s.")
    taus: list[float] = Field([0.05], min_length=1, description="Fresh-noise scales τ.")
    seeds: int = Field(5, ge=1, description="Seeds per grid point: master seed, master seed + 1, ...")

    @field_validator("signals", "taus")
    @classmethod
    def _nonnegative(cls, values: list[float]) -> list[float]:
        if any(v < 0 for v in values):
            raise ValueError("grid values must be nonnegative")
        return values


class OutputSection(Section):
    directory: Optional[Path] = Field(None, description="Output directory; --out overrides it.")
    threads: int = Field(DEFAULT_THREADS, ge=1, description="Worker threads for reconstruction and sweep cells.")
    image_shape: Optional[tuple[int, int]] = Field(None, description="Raster shape for render; square root of d when omitted.")
    render_limit: int = Field(8, ge=1, description="Samples rendered per class.")
    rgb_overview: bool = Field(False, description="Also write a color overview (x, Δ, Δ²) per rendered sample.")


DETECTORS = ("first", "second", "did", "did-alt", "did3", "recon")

# Fields that never change results and stay out of the hash.
HASH_EXCLUDE: dict[str, Any] = {"seed": True, "output": {"directory", "threads"}}


class ExperimentConfig(Section):
    seed: int = Field(0, ge=0, description="Master seed.")
    signal: float = Field(1.0, ge=0, description="Signal strength s of real samples in generate/run.")
    detectors: Optional[list[str]] = Field(None, description="Restrict reported detectors; all when omitted.")
    manifold: ManifoldSection = Field(default_factory=ManifoldSection)
    operator: OperatorSection = Field(default_factory=OperatorSection)
    counts: CountsSection = Field(default_factory=CountsSection)
    detector: DetectorSection = Field(default_factory=DetectorSection)
    threshold: ThresholdSection = Field(default_factory=ThresholdSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @field_validator("detectors")
    @classmethod
    def _known_detectors(cls, names: Optional[list[str]]) -> Optional[list[str]]:
        if names is not None:
            unknown = sorted(set(names) - set(DETECTORS))
            if unknown or not names:
                raise ValueError(f"unknown detectors {unknown}; choose from {', '.join(DETECTORS)}")
        return names

    @model_validator(mode="after")
    def _operator_fits_manifold(self) -> "ExperimentConfig":
        if self.operator.name == "ddim" and self.manifold.kind is not ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
            raise ValueError("the ddim operator needs manifold.kind = 'mixture'")
        return self

    def config_hash(self) -> str:
        canonical = json.dumps(
            self.model_dump(mode="json", exclude=HASH_EXCLUDE), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def override(self, **changes: Any) -> "ExperimentConfig":
        """Copy with dotted-path overrides, e.g. ``override(**{"operator.analytic.tau": 0.1})``; re-validated."""
        data = self.model_dump(mode="json")
        for path, value in changes.items():
            if value is None:
                continue
            node = data
            *parents, leaf = path.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}") from e


def load_config(path: Optional[Path]) -> ExperimentConfig:
    """Reads TOML (``[sections]`` of ``key = value``) or JSON; no path means all defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        elif path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        else:
            raise ConfigError(f"Unsupported config format '{path.suffix}' (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e
    return parse_config(data)
