"""
Seed derivation - independent, reproducible streams from a base seed
"""

import numpy as np


def derive_seed(base: int, *keys: int) -> int:
    """Mix a base seed with integer keys into a new 32-bit seed"""
    state = np.random.SeedSequence([int(base), *[int(k) for k in keys]]).generate_state(1)
    return int(state[0])
