"""Residual rasters for visual inspection: x, Δ(x), Δ(x′) and Δ²(x) per sample."""

from __future__ import annotations

import asyncio
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.core import paths
from src.core.harness.config import ExperimentConfig
from src.core.harness.dataset import DatasetEntry, Split, build_manifold, generate_dataset, select
from src.core.harness.pipeline import build_operator, reconstruct_all
from src.core.imaging import compose_rgb, infer_shape, quantize_to_image, write_netpbm
from src.core.manifold import Label
from src.core.reconstruction.trace import ReconstructionTrace
from src.core.residuals import first_order, second_order


def pick(entries: Sequence[DatasetEntry], per_class: int) -> list[DatasetEntry]:
    """First ``per_class`` entries of each label from the test split (whole dataset if it has none)."""
    pool = select(entries, Split.TEST) or list(entries)
    picked = []
    for label in (Label.REAL, Label.FAKE):
        picked += [e for e in pool if e.label is label][:per_class]
    return sorted(picked, key=lambda e: e.index)


def rasters(trace: ReconstructionTrace, shape: tuple[int, int]) -> dict[str, np.ndarray]:
    delta2 = second_order(trace)
    return {
        "x": quantize_to_image(trace.x, shape),
        "delta": quantize_to_image(first_order(trace.x, trace.x1), shape),
        "delta_prime": quantize_to_image(first_order(trace.x1, trace.x2), shape),
        "delta2": quantize_to_image(delta2, shape, symmetric=True),
    }


def render(
    config: ExperimentConfig,
    out_dir: Path,
    entries: Optional[list[DatasetEntry]] = None,
) -> list[Path]:
    """Writes ``{index:05d}_{label}_{map}.pgm`` for every picked sample (plus ``.ppm`` overviews)."""
    shape = infer_shape(config.manifold.ambient_dim, config.output.image_shape)
    manifold = build_manifold(config.manifold)
    entries = entries if entries is not None else generate_dataset(config, manifold)
    chosen = pick(entries, config.output.render_limit)
    operator = build_operator(config, manifold)

    async def main() -> list[ReconstructionTrace]:
        return await reconstruct_all(chosen, operator, config.seed, 2, asyncio.Semaphore(config.output.threads))

    traces = asyncio.run(main())
    target = Path(out_dir) / paths.RENDER_DIR
    paths.ensure_dirs(target)
    written = []
    for entry, trace in zip(chosen, traces):
        stem = f"{entry.index:05d}_{entry.label.value}"
        maps = rasters(trace, shape)
        for name, raster in maps.items():
            written.append(write_netpbm(target / f"{stem}_{name}.pgm", raster))
        if config.output.rgb_overview:
            overview = compose_rgb([maps["x"], maps["delta"], maps["delta2"]])
            written.append(write_netpbm(target / f"{stem}_overview.ppm", overview))
    return written
