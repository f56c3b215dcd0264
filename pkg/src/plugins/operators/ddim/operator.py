from functools import partial

import numpy as np

from src.core.errors import InvalidInputError
from src.core.interfaces import BaseOperator
from src.core.manifold import ManifoldKind, ManifoldModel
from src.core.reconstruction.diffusion import DiffusionSchedule, GmmScoreModel, exact_eps, reconstruct_ddim
from .config import DdimConfig


class DdimOperator(BaseOperator[DdimConfig]):
    """
    Deterministic DDIM inversion followed by regeneration, with the noise predictor
    given in closed form by the manifold's Gaussian mixture.
    """
    name = "ddim"
    config_class = DdimConfig

    def __init__(self, manifold: ManifoldModel, config=None):
        super().__init__(manifold, config)
        ok, message = self.healthcheck()
        if not ok:
            raise InvalidInputError(message)
        self._build()

    def _build(self):
        c = self.config
        strided = DiffusionSchedule.linear(c.steps, c.beta_start, c.beta_end, c.train_steps)
        self.schedule = DiffusionSchedule(strided.alpha_bars, eta=c.eta)
        self.score_model = GmmScoreModel.from_manifold(self.manifold)
        self._eps = partial(exact_eps, self.score_model, self.schedule)

    def update_config(self, new_data: dict):
        super().update_config(new_data)
        self._build()

    def reconstruct(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return reconstruct_ddim(self.score_model, self.schedule, x, self._eps)

    def healthcheck(self) -> tuple[bool, str]:
        if not isinstance(self.manifold, ManifoldModel):
            return False, "ddim operator needs a ManifoldModel"
        if self.manifold.kind is not ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT:
            return False, "ddim operator needs a manifold with mixture support"
        if self.config.train_steps < self.config.steps:
            return False, f"cannot stride {self.config.steps} steps out of {self.config.train_steps}"
        return True, "OK"
