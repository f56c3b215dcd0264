"""Labeled synthetic datasets and their CSV layout.

``samples.csv`` columns: ``index,split,label,signal,seed_id,x0..x{d-1}``. Floats are
written with repr so a reread dataset is bit-identical to the generated one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from src.core import seeding
from src.core.errors import ConfigError, InvalidInputError
from src.core.harness.config import ExperimentConfig, ManifoldSection
from src.core.manifold import Label, LabeledSample, ManifoldKind, ManifoldModel, sample_fake, sample_real


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True, eq=False)
class DatasetEntry:
    index: int
    split: Split
    sample: LabeledSample

    @property
    def label(self) -> Label:
        return self.sample.label

    @property
    def point(self) -> np.ndarray:
        return self.sample.point


def mixture_means(chart_dim: int, components: int, radius: float) -> np.ndarray:
    """Component m sits at ±radius·e_j in chart coordinates, j = (m // 2) mod k, sign + for even m."""
    means = np.zeros((components, chart_dim))
    for m in range(components):
        means[m, (m // 2) % chart_dim] = radius if m % 2 == 0 else -radius
    return means


def build_manifold(section: ManifoldSection) -> ManifoldModel:
    offset = None if section.offset is None else np.array(section.offset, dtype=float)
    extra = {}
    if section.kind is ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
        extra = dict(
            kind=section.kind,
            mixture_means=mixture_means(section.chart_dim, section.mixture_components, section.mixture_radius),
            mixture_sigma=section.mixture_sigma,
        )
    if section.chart == "random":
        rng = np.random.default_rng(section.seed)
        return ManifoldModel.random(section.ambient_dim, section.chart_dim, rng, offset, **extra)
    return ManifoldModel.axis(section.ambient_dim, section.chart_dim, offset, **extra)


def split_counts(config: ExperimentConfig) -> list[tuple[Split, int]]:
    c = config.counts
    return [(Split.TRAIN, c.train_per_class), (Split.VAL, c.val_per_class), (Split.TEST, c.test_per_class)]


def generate_dataset(config: ExperimentConfig, manifold: Optional[ManifoldModel] = None) -> list[DatasetEntry]:
    """Per split, real samples then fake ones; sample i draws from stream (seed, i, DRAW)."""
    manifold = manifold or build_manifold(config.manifold)
    entries: list[DatasetEntry] = []
    index = 0
    for split, n in split_counts(config):
        for label in (Label.REAL, Label.FAKE):
            for _ in range(n):
                rng = seeding.stream(config.seed, index, seeding.DRAW)
                if label is Label.REAL:
                    sample = sample_real(
                        manifold,
                        config.signal,
                        rng,
                        randomize_direction=config.manifold.randomize_direction,
                        seed_id=index,
                    )
                else:
                    sample = sample_fake(manifold, rng, seed_id=index)
                entries.append(DatasetEntry(index, split, sample))
                index += 1
    if not entries:
        raise ConfigError("configuration produces an empty dataset")
    return entries


def select(entries: Iterable[DatasetEntry], split: Split) -> list[DatasetEntry]:
    return [e for e in entries if e.split is split]


def write_samples(path: Path, entries: list[DatasetEntry]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = entries[0].point.size if entries else 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "split", "label", "signal", "seed_id", *(f"x{j}" for j in range(dim))])
        for e in entries:
            writer.writerow(
                [e.index, e.split.value, e.label.value, repr(float(e.sample.signal)), e.sample.seed_id,
                 *(repr(float(v)) for v in e.point)]
            )
    return path


def read_samples(path: Path) -> list[DatasetEntry]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Dataset not found: {path}")
    entries: list[DatasetEntry] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[:5] != ["index", "split", "label", "signal", "seed_id"]:
            raise InvalidInputError(f"{path} is not a samples file (unexpected header)")
        for row in reader:
            try:
                sample = LabeledSample(
                    point=np.array([float(v) for v in row[5:]]),
                    label=Label(row[2]),
                    signal=float(row[3]),
                    seed_id=int(row[4]),
                )
                entries.append(DatasetEntry(int(row[0]), Split(row[1]), sample))
            except (ValueError, IndexError) as e:
                if isinstance(e, InvalidInputError):
                    raise
                raise InvalidInputError(f"malformed row in {path}: {e}") from e
    return entries
