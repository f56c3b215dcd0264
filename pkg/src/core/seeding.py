import numpy as np

# Call counters for the per-sample streams.
DRAW = 0
RECONSTRUCT = 1


def stream(master_seed: int, sample_index: int, counter: int) -> np.random.Generator:
    """Counter-based RNG stream: the same triple always yields the same generator,
    whichever thread asks for it and in whatever order."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, sample_index, counter]))
