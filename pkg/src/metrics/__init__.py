"""
metrics - step-wise APR, permutation significance and prediction correlation
"""

from .precision import (
    MetricsReport,
    average_precision,
    mean_apr_or_nan,
    precision_recall_points,
    stepwise_apr,
)
from .significance import permutation_test
from .correlation import CorrelationReport, envelope, prediction_correlation

__all__ = [
    "MetricsReport",
    "average_precision",
    "mean_apr_or_nan",
    "precision_recall_points",
    "stepwise_apr",
    "permutation_test",
    "CorrelationReport",
    "envelope",
    "prediction_correlation",
]
