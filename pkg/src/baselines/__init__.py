"""
baselines - ensembles built from a shared pool of independently trained LSTMs
"""

from .pool import ModelPool, PoolMember, stepwise_validation_loss, train_expert, train_pool
from .selection import (
    average_ensemble,
    average_predictions,
    best_single,
    stepwise_select,
    stepwise_select_predict,
)
from .stacking import (
    StackingConfig,
    StackingWeights,
    combine_predictions,
    fit_stacking,
    stacked_predict,
)

__all__ = [
    "ModelPool",
    "PoolMember",
    "stepwise_validation_loss",
    "train_expert",
    "train_pool",
    "average_ensemble",
    "average_predictions",
    "best_single",
    "stepwise_select",
    "stepwise_select_predict",
    "StackingConfig",
    "StackingWeights",
    "combine_predictions",
    "fit_stacking",
    "stacked_predict",
]
