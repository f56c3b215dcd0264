"""Flat text format for trained ensembles.

    # didetect-ensemble v1
    threshold = 0.7071067811865476
    fusion = and-real
    branches = delta1,delta2
    [branch delta1]
    layout = bias,mean,...
    center = 0.0,...
    scale = 1.0,...
    weights = 8
    -0.1234
    ...

Floats are written with repr, so a loaded ensemble predicts bit-for-bit like the saved one.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator

import numpy as np

from src.core.detector.classifier import LogisticClassifier, TrainingSettings
from src.core.detector.ensemble import DetectorEnsemble, Fusion
from src.core.errors import InvalidInputError
from src.core.residuals import Branch

MAGIC = "# didetect-ensemble v1"


def _floats(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in values)


def dumps(ens: DetectorEnsemble) -> str:
    lines = [
        MAGIC,
        f"threshold = {float(ens.threshold)!r}",
        f"fusion = {ens.fusion.value}",
        f"branches = {','.join(b.value for b in ens.branches)}",
    ]
    for branch, clf in ens.classifiers.items():
        s = clf.settings
        lines += [
            f"[branch {branch.value}]",
            f"layout = {','.join(clf.layout)}",
            f"center = {_floats(clf.center)}",
            f"scale = {_floats(clf.scale)}",
            f"learning_rate = {float(s.learning_rate)!r}",
            f"iterations = {s.iterations}",
            f"l2 = {float(s.l2)!r}",
            f"standardize = {str(s.standardize).lower()}",
            f"weights = {clf.n_features}",
            *(repr(float(w)) for w in clf.weights),
        ]
    return "\n".join(lines) + "\n"


def save(ens: DetectorEnsemble, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(ens), encoding="utf-8")
    return path


def _key_value(line: str) -> tuple[str, str]:
    key, sep, value = line.partition("=")
    if not sep:
        raise InvalidInputError(f"expected 'key = value', got {line!r}")
    return key.strip(), value.strip()


def _parse_floats(value: str) -> np.ndarray:
    return np.array([float(v) for v in value.split(",")]) if value else np.zeros(0)


def _read_branch(lines: Iterator[str]) -> LogisticClassifier:
    fields: dict[str, str] = {}
    try:
        while "weights" not in fields:
            key, value = _key_value(next(lines))
            fields[key] = value
        n = int(fields["weights"])
        weights = np.array([float(next(lines)) for _ in range(n)])
        settings = TrainingSettings(
            learning_rate=float(fields["learning_rate"]),
            iterations=int(fields["iterations"]),
            l2=float(fields["l2"]),
            standardize=fields["standardize"] == "true",
        )
        layout = tuple(fields["layout"].split(",")) if fields["layout"] else ()
        return LogisticClassifier(
            weights, _parse_floats(fields["center"]), _parse_floats(fields["scale"]), settings, layout
        )
    except (KeyError, StopIteration) as e:
        raise InvalidInputError(f"truncated branch block: {e}") from e


def loads(text: str) -> DetectorEnsemble:
    lines = iter(line for line in text.splitlines() if line.strip())
    if next(lines, None) != MAGIC:
        raise InvalidInputError("not a didetect ensemble file (bad header)")
    header: dict[str, str] = {}
    classifiers: dict[Branch, LogisticClassifier] = {}
    try:
        for line in lines:
            if line.startswith("[branch ") and line.endswith("]"):
                branch = Branch(line[len("[branch "):-1].strip())
                classifiers[branch] = _read_branch(lines)
            else:
                key, value = _key_value(line)
                header[key] = value
        threshold = float(header["threshold"])
        fusion = Fusion(header["fusion"])
    except (KeyError, ValueError) as e:
        if isinstance(e, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed ensemble file: {e}") from e
    return DetectorEnsemble(classifiers, threshold, fusion)


def load(path: Path) -> DetectorEnsemble:
    return loads(Path(path).read_text(encoding="utf-8"))
