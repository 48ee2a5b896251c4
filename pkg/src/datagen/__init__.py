"""
datagen - synthetic datasets with controllable temporal conditional shift
"""

from .shift import (
    Dataset,
    SequenceInstance,
    ShiftConfig,
    ShiftWeights,
    compute_scores,
    generate_dataset,
    generate_shift_weights,
    label_threshold,
    relabel,
    sample_features,
)
from .storage import load_dataset, save_dataset

__all__ = [
    "Dataset",
    "SequenceInstance",
    "ShiftConfig",
    "ShiftWeights",
    "compute_scores",
    "generate_dataset",
    "generate_shift_weights",
    "label_threshold",
    "relabel",
    "sample_features",
    "load_dataset",
    "save_dataset",
]
