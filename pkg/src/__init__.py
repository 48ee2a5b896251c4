"""
Main package for the MAES Laboratory
Mixture of attentive experts vs. ensemble baselines under temporal conditional shift
"""

__version__ = "1.0.0"
__all__ = [
    "baselines",
    "datagen",
    "diffcore",
    "expcli",
    "gate",
    "maes",
    "metrics",
    "seqmodels",
]
