from .analytic import BiasKind, PerturbationModel, reconstruct_analytic
from .diffusion import (
    DiffusionSchedule,
    Direction,
    GmmScoreModel,
    ddim_step,
    exact_eps,
    reconstruct_ddim,
)
from .trace import ReconstructionTrace, extend, reconstruct_chain, reconstruct_twice
