from pydantic import Field

from src.core.interfaces import ComponentConfig


class DdimConfig(ComponentConfig):
    steps: int = Field(20, ge=1, le=1000, description="Number of DDIM steps T used for inversion and sampling.")
    beta_start: float = Field(1e-4, gt=0, lt=1, description="First β of the linear training schedule.")
    beta_end: float = Field(0.02, gt=0, lt=1, description="Last β of the linear training schedule.")
    train_steps: int = Field(1000, ge=1, description="Length of the training schedule the DDIM steps are strided from.")
    eta: float = Field(0.0, description="DDIM stochasticity; only 0 is supported.")
