import numpy as np

from src.core.interfaces import BaseOperator
from src.core.manifold import ManifoldModel
from src.core.reconstruction.analytic import PerturbationModel, reconstruct_analytic
from .config import AnalyticConfig


class AnalyticOperator(BaseOperator[AnalyticConfig]):
    """
    R(x) = Π_M(x) + f(Π_M(x)) + fresh noise.
    Deterministic when tau and normal_leak are both zero.
    """
    name = "analytic"
    config_class = AnalyticConfig

    def __init__(self, manifold: ManifoldModel, config=None):
        super().__init__(manifold, config)
        self.perturbation = self._build_perturbation()

    def _build_perturbation(self) -> PerturbationModel:
        c = self.config
        return PerturbationModel(
            kind=c.bias_kind,
            beta=c.beta,
            amplitude_swing=c.amplitude_swing,
            frequency=c.frequency,
            phase=c.phase,
            fresh_noise_scale=c.tau,
            normal_leak=c.normal_leak,
            offmanifold_noise_gain=c.offmanifold_noise_gain,
        )

    def update_config(self, new_data: dict):
        super().update_config(new_data)
        self.perturbation = self._build_perturbation()

    def reconstruct(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return reconstruct_analytic(self.manifold, self.perturbation, x, rng)

    def healthcheck(self) -> tuple[bool, str]:
        if not isinstance(self.manifold, ManifoldModel):
            return False, "analytic operator needs a ManifoldModel"
        return True, "OK"
