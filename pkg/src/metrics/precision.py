"""
Average precision, per prediction step and averaged over the sequence
"""

import logging

import numpy as np
from pydantic import BaseModel, Field

from ..errors import UndefinedMetricError

logger = logging.getLogger(__name__)


class MetricsReport(BaseModel):
    per_step_apr: list[float | None]
    mean_apr: float
    std_apr: float
    skipped_steps: list[int] = Field(default_factory=list)
    std_across_seeds: float | None = None
    comparisons: dict[str, float] = Field(default_factory=dict)
    p_values: dict[str, float] = Field(default_factory=dict)

    def apr_array(self) -> np.ndarray:
        """Per-step APR with NaN where the step was skipped"""
        return np.array([np.nan if v is None else v for v in self.per_step_apr], dtype=np.float64)


def precision_recall_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Precision and recall at every distinct score threshold, highest first.

    Scores are sorted descending with a stable sort (ties keep their original
    order); tied scores form one threshold.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1).astype(np.float64)
    if scores.shape != labels.shape:
        raise ValueError(f"scores and labels differ in size: {scores.size} vs {labels.size}")
    n_pos = labels.sum()
    if n_pos == 0:
        raise UndefinedMetricError("average precision is undefined without positive labels")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    true_pos = np.cumsum(labels[order])
    predicted_pos = np.arange(1, scores.size + 1, dtype=np.float64)

    # last position of each block of tied scores
    block_end = np.ones(scores.size, dtype=bool)
    block_end[:-1] = sorted_scores[:-1] != sorted_scores[1:]

    tp = true_pos[block_end]
    precision = tp / predicted_pos[block_end]
    recall = tp / n_pos
    return precision, recall


def average_precision(scores, labels) -> float:
    """AP = sum_i (R_i - R_{i-1}) * P_i over the step-interpolated PR curve"""
    precision, recall = precision_recall_points(scores, labels)
    previous = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - previous) * precision))


def stepwise_apr(predictions, labels) -> MetricsReport:
    """AP over the N sequences at each step, then mean and std across steps"""
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.ndim != 2:
        raise ValueError(f"expected matching (N, T) arrays, got {predictions.shape} and {labels.shape}")

    per_step: list[float | None] = []
    skipped = []
    for t in range(predictions.shape[1]):
        try:
            per_step.append(average_precision(predictions[:, t], labels[:, t]))
        except UndefinedMetricError:
            logger.warning(f"[METRICS] step {t} has no positive labels; skipped")
            per_step.append(None)
            skipped.append(t)

    defined = np.array([v for v in per_step if v is not None])
    if defined.size == 0:
        raise UndefinedMetricError("no prediction step has a positive label")

    return MetricsReport(
        per_step_apr=per_step,
        mean_apr=float(defined.mean()),
        std_apr=float(defined.std()),
        skipped_steps=skipped,
    )


def mean_apr_or_nan(predictions, labels) -> float:
    """Convenience for model selection: NaN instead of raising"""
    try:
        return stepwise_apr(predictions, labels).mean_apr
    except UndefinedMetricError:
        return float("nan")
