"""
Selection baselines - best single model, post-hoc step-wise selection and the average ensemble
"""

import numpy as np

from .pool import ModelPool


def best_single(pool: ModelPool) -> int:
    """Index of the member with the highest validation mean APR (NaN counts as worst)"""
    scores = np.array([m.val_apr for m in pool.members], dtype=np.float64)
    scores = np.where(np.isnan(scores), -np.inf, scores)
    return int(np.argmax(scores))


def stepwise_select(pool: ModelPool) -> np.ndarray:
    """Per step, the member with minimal validation loss; ties go to the lowest index"""
    return np.argmin(pool.val_step_losses(), axis=0)


def stepwise_select_predict(indices, predictions) -> np.ndarray:
    """Take member ``indices[t]``'s prediction at every step: (T,), (M, N, T) -> (N, T)"""
    predictions = np.asarray(predictions, dtype=np.float64)
    indices = np.asarray(indices, dtype=int)
    T = predictions.shape[-1]
    return predictions[indices, :, np.arange(T)].T


def average_predictions(predictions) -> np.ndarray:
    """(M, N, T) -> (N, T)"""
    return np.asarray(predictions, dtype=np.float64).mean(axis=0)


def average_ensemble(pool: ModelPool, x) -> np.ndarray:
    """p = 1/M sum_m f_m(x)"""
    return average_predictions(pool.predict(x))
