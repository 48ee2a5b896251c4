"""
maes - mixture of attentive experts: LSTM experts, a context RNN and an attention gate
"""

from .config import EnsembleSpec, TrainConfig
from .losses import (
    PROB_FLOOR,
    bce_loss,
    clamp_probs,
    importance_loss,
    log_likelihood,
    maes_loss,
    total_loss,
)
from .model import MaesModel, MaesOutput, maes_forward, maes_predict_hard
from .training import (
    BestTracker,
    EpochRecord,
    TrainedMaes,
    TrainingHistory,
    iterate_batches,
    require_data,
    run_phase,
    train_maes,
    validation_loss,
)

__all__ = [
    "EnsembleSpec",
    "TrainConfig",
    "PROB_FLOOR",
    "bce_loss",
    "clamp_probs",
    "importance_loss",
    "log_likelihood",
    "maes_loss",
    "total_loss",
    "MaesModel",
    "MaesOutput",
    "maes_forward",
    "maes_predict_hard",
    "BestTracker",
    "EpochRecord",
    "TrainedMaes",
    "TrainingHistory",
    "iterate_batches",
    "require_data",
    "run_phase",
    "train_maes",
    "validation_loss",
]
