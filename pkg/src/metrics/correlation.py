"""
Prediction correlation between models
"""

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class CorrelationReport:
    matrix: np.ndarray  # (M, M)
    flagged: list[tuple[int, int]] = field(default_factory=list)

    def mean_off_diagonal(self) -> float:
        M = self.matrix.shape[0]
        if M < 2:
            return float("nan")
        mask = ~np.eye(M, dtype=bool)
        return float(self.matrix[mask].mean())


def prediction_correlation(predictions) -> CorrelationReport:
    """Pearson r between every pair of models over all flattened (n, t) predictions.

    ``predictions`` is (M, ...). Pairs involving a constant model are flagged
    and reported as 0; the diagonal is always 1.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    M = predictions.shape[0]
    flat = predictions.reshape(M, -1)

    constant = np.ptp(flat, axis=1) == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        matrix = np.atleast_2d(np.corrcoef(flat))
    matrix = np.clip((matrix + matrix.T) / 2.0, -1.0, 1.0)

    flagged = []
    for i in range(M):
        for j in range(i + 1, M):
            if constant[i] or constant[j]:
                matrix[i, j] = matrix[j, i] = 0.0
                flagged.append((i, j))
    np.fill_diagonal(matrix, 1.0)

    if flagged:
        logger.warning(
            f"[METRICS] correlation undefined for {len(flagged)} pair(s) with a constant model; reported as 0"
        )
    return CorrelationReport(matrix=matrix, flagged=flagged)


def envelope(predictions) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise min and max over models, (M, ...) -> (...), (...)"""
    predictions = np.asarray(predictions, dtype=np.float64)
    return predictions.min(axis=0), predictions.max(axis=0)
