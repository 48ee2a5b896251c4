"""
Architecture sampling for expert pools
"""

import numpy as np

from .lstm import ExpertSpec


def sample_expert_specs(n: int, low: int, high: int, seed: int,
                        cell_variant: str = "standard") -> list[ExpertSpec]:
    """n hidden dimensions drawn uniformly from the inclusive range [low, high]"""
    rng = np.random.default_rng(seed)
    dims = rng.integers(low, high, size=n, endpoint=True)
    return [ExpertSpec(hidden_dim=int(h), cell_variant=cell_variant) for h in dims]
