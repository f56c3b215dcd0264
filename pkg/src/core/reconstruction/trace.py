from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from src.core.errors import DimensionMismatchError, InvalidInputError

ReconstructionOperator = Callable[[np.ndarray, np.random.Generator], np.ndarray]


@dataclass(frozen=True, eq=False)
class ReconstructionTrace:
    """x, x′ = R(x), x″ = R(x′) and, when requested, x‴ = R(x″)."""

    x: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: Optional[np.ndarray] = None
    operator_id: str = ""
    seed_id: int = 0

    def __post_init__(self):
        points = [p for p in (self.x, self.x1, self.x2, self.x3) if p is not None]
        d = np.shape(points[0])
        for p in points[1:]:
            if np.shape(p) != d:
                raise DimensionMismatchError(d[0] if d else 0, np.size(p), "reconstruction")

    @property
    def ambient_dim(self) -> int:
        return int(np.size(self.x))

    @property
    def order(self) -> int:
        """How many consecutive reconstructions the trace holds."""
        return 2 if self.x3 is None else 3


def _operator_id(op: ReconstructionOperator) -> str:
    return getattr(op, "operator_id", getattr(op, "__name__", type(op).__name__))


def reconstruct_twice(
    op: ReconstructionOperator, x: np.ndarray, rng: np.random.Generator, seed_id: int = 0
) -> ReconstructionTrace:
    """x1 = R(x), x2 = R(x1); both calls share rng so their fresh noise is independent."""
    return reconstruct_chain(op, x, rng, order=2, seed_id=seed_id)


def reconstruct_chain(
    op: ReconstructionOperator, x: np.ndarray, rng: np.random.Generator, order: int = 2, seed_id: int = 0
) -> ReconstructionTrace:
    if order not in (2, 3):
        raise InvalidInputError(f"reconstruction order must be 2 or 3, got {order}")
    x = np.asarray(x, dtype=float)
    chain = [x]
    for _ in range(order):
        chain.append(op(chain[-1], rng))
    return ReconstructionTrace(
        x=x,
        x1=chain[1],
        x2=chain[2],
        x3=chain[3] if order == 3 else None,
        operator_id=_operator_id(op),
        seed_id=seed_id,
    )


def extend(trace: ReconstructionTrace, op: ReconstructionOperator, rng: np.random.Generator) -> ReconstructionTrace:
    """Adds x‴ = R(x″) to a two-step trace."""
    if trace.x3 is not None:
        return trace
    return replace(trace, x3=op(trace.x2, rng))
