from pydantic import Field

from src.core.interfaces import ComponentConfig
from src.core.reconstruction.analytic import BiasKind


class AnalyticConfig(ComponentConfig):
    bias_kind: BiasKind = Field(BiasKind.CONSTANT, description="Constant bias field or the sample-varying sinusoidal shear.")
    beta: float = Field(1.0, ge=0, description="Bias magnitude ‖f‖.")
    amplitude_swing: float = Field(0.5, ge=0, lt=1, description="Relative swing γ of the sinusoidal amplitude.")
    frequency: float = Field(1.0, description="Angular frequency ω of the sinusoidal amplitude.")
    phase: float = Field(0.0, description="Phase φ of the sinusoidal amplitude.")
    tau: float = Field(0.0, ge=0, description="Standard deviation of the fresh tangent noise per call.")
    normal_leak: float = Field(0.0, ge=0, description="Standard deviation λ of noise leaking into the normal space.")
    offmanifold_noise_gain: float = Field(
        0.0, ge=0, description="Tangent noise grows as τ·(1 + gain·dist(x, M)) for off-manifold inputs."
    )
