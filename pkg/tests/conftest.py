import numpy as np
import pytest

from src.core.harness.config import ExperimentConfig
from src.core.manifold import ManifoldModel
from src.core.reconstruction.analytic import PerturbationModel


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def axis16():
    """d = 16, k = 8 axis-aligned chart at the origin."""
    return ManifoldModel.axis(16, 8)


@pytest.fixture
def line2d():
    """The x-axis of R²."""
    return ManifoldModel.axis(2, 1)


@pytest.fixture
def shift08():
    """Constant tangent bias of 0.8 along the x-axis; no fresh noise."""
    return PerturbationModel(beta=0.8)


@pytest.fixture
def small_config(tmp_path):
    """A run that finishes in well under a second."""
    return ExperimentConfig.model_validate({
        "seed": 3,
        "signal": 1.0,
        "counts": {"train_per_class": 60, "test_per_class": 60},
        "detector": {"training": {"iterations": 200}},
        "sweep": {"signals": [1.0], "taus": [0.05], "seeds": 1},
        "output": {"directory": str(tmp_path / "out"), "threads": 1, "image_shape": [4, 4], "render_limit": 2},
    })
