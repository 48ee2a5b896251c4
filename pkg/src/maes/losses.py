"""
Training objectives - BCE, the MAES mixture likelihood and the importance term
"""

import numpy as np

from ..diffcore import Tensor, as_tensor, clip, log, logsumexp
from ..errors import UsageError

PROB_FLOOR = 1e-7
SIMPLEX_TOL = 1e-9


def clamp_probs(p) -> Tensor:
    return clip(as_tensor(p), PROB_FLOOR, 1.0 - PROB_FLOOR)


def log_likelihood(pred, labels) -> Tensor:
    """y log p + (1 - y) log(1 - p), elementwise; labels broadcast over trailing expert axis if needed"""
    pred = clamp_probs(pred)
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != pred.shape:
        labels = np.broadcast_to(labels[..., None], pred.shape)
    return labels * log(pred) + (1.0 - labels) * log(1.0 - pred)


def bce_loss(pred, labels) -> Tensor:
    """-sum over (n, t) of the Bernoulli log-likelihood"""
    return -log_likelihood(pred, labels).sum()


def maes_loss(expert_preds, alpha, labels, log_alpha=None) -> Tensor:
    """-sum_n sum_t log sum_m alpha_m * p_m^y (1 - p_m)^(1 - y), via log-sum-exp.

    ``expert_preds`` and ``alpha`` are (N, T, M); ``labels`` is (N, T).
    Pass ``log_alpha`` (e.g. a log-softmax of the scores) to avoid taking the
    log of very small weights.
    """
    expert_preds = as_tensor(expert_preds)
    if log_alpha is None:
        alpha = as_tensor(alpha)
        a = alpha.values
        if a.shape != expert_preds.shape:
            raise UsageError(f"alpha shape {a.shape} does not match expert predictions {expert_preds.shape}")
        if np.any(a < 0) or np.any(np.abs(a.sum(axis=-1) - 1.0) > SIMPLEX_TOL):
            raise UsageError("alpha is not a simplex along the expert axis")
        log_alpha = log(clip(alpha, np.finfo(np.float64).tiny, 1.0))

    per_step = logsumexp(log_alpha + log_likelihood(expert_preds, labels), axis=-1)
    return -per_step.sum()


def importance_loss(alpha, kind: str = "printed") -> Tensor:
    """Regulariser on the per-expert attention mass imp_m = sum_n sum_t alpha_m.

    printed: -sum_m imp_m^2
    cv:      squared coefficient of variation of imp
    """
    alpha = as_tensor(alpha)
    M = alpha.shape[-1]
    importance = alpha.reshape(-1, M).sum(axis=0)
    if kind == "printed":
        return -(importance * importance).sum()
    if kind == "cv":
        mean = importance.mean()
        centered = importance - mean
        return (centered * centered).mean() / (mean * mean)
    raise UsageError(f"unknown importance loss kind '{kind}'")


def total_loss(loss: Tensor, alpha, w_imp: float, kind: str = "printed") -> Tensor:
    """L_tot = L + w_imp * L_imp"""
    if w_imp == 0:
        return loss
    return loss + w_imp * importance_loss(alpha, kind)
