"""
Stacking - a linear meta-learner fitted on the pool's validation predictions

Weights are either one row shared by every step (global) or one row per step
(stepwise). The softmax parametrization keeps each row a convex combination;
the sigmoid parametrization is an unconstrained linear model on logits.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from ..diffcore import ParamSet, adam_step, backward, create_adam_state, sigmoid, softmax, stable_sigmoid
from ..errors import UsageError
from ..maes import PROB_FLOOR, bce_loss
from .pool import ModelPool

logger = logging.getLogger(__name__)


class StackingConfig(BaseModel):
    mode: Literal["global", "stepwise"] = "stepwise"
    steps: int = Field(default=1000, ge=0)
    learning_rate: float = Field(default=0.01, gt=0.0)
    parametrization: Literal["softmax", "sigmoid"] = "softmax"


@dataclass
class StackingWeights:
    mode: str
    parametrization: str
    weights: np.ndarray  # (M,) or (T, M); convex rows for softmax, raw coefficients for sigmoid
    bias: np.ndarray | None = None  # () or (T,), sigmoid only

    def rows(self, T: int) -> np.ndarray:
        """(T, M) weight rows; a global row is repeated for every step"""
        if self.mode == "global":
            return np.broadcast_to(self.weights, (T, self.weights.shape[-1])).copy()
        if self.weights.shape[0] != T:
            raise UsageError(f"stepwise weights cover {self.weights.shape[0]} steps, predictions have {T}")
        return self.weights.copy()

    def bias_rows(self, T: int) -> np.ndarray:
        if self.bias is None:
            return np.zeros(T)
        return np.broadcast_to(self.bias, (T,)).copy()


def _logits(predictions: np.ndarray) -> np.ndarray:
    p = np.clip(predictions, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return np.log(p) - np.log1p(-p)


def fit_stacking(pool: ModelPool, labels, config: StackingConfig | None = None) -> StackingWeights:
    """Full-batch Adam on the BCE of the combined validation predictions"""
    config = config or StackingConfig()
    predictions = pool.val_predictions()
    if predictions is None:
        raise UsageError("stacking needs validation predictions for every pool member")
    labels = np.asarray(labels, dtype=np.float64)
    M, N, T = predictions.shape
    if labels.shape != (N, T):
        raise UsageError(f"labels have shape {labels.shape}, validation predictions are ({N}, {T})")

    stacked = np.moveaxis(predictions, 0, -1)  # (N, T, M)
    shape = (M,) if config.mode == "global" else (T, M)

    params = ParamSet(0)
    if config.parametrization == "softmax":
        params.zeros("w", shape)
    else:
        params.add("w", np.full(shape, 1.0 / M))
        params.zeros("b", () if config.mode == "global" else (T,))
        stacked = _logits(stacked)

    def combine():
        if config.parametrization == "softmax":
            return (stacked * softmax(params["w"], axis=-1)).sum(axis=-1)
        return sigmoid((stacked * params["w"]).sum(axis=-1) + params["b"])

    optimizer = create_adam_state(params, learning_rate=config.learning_rate)
    loss = None
    for _ in range(config.steps):
        params.zero_grad()
        loss = bce_loss(combine(), labels) / float(N * T)
        backward(loss)
        adam_step(params, optimizer)

    if config.parametrization == "softmax":
        raw = params["w"].values
        shifted = np.exp(raw - raw.max(axis=-1, keepdims=True))
        weights = StackingWeights(config.mode, "softmax", shifted / shifted.sum(axis=-1, keepdims=True))
    else:
        weights = StackingWeights(config.mode, "sigmoid", params["w"].values.copy(), params["b"].values.copy())

    final = float("nan") if loss is None else loss.item()
    logger.info(f"[STACKING] {config.mode} {config.parametrization} weights fitted on M={M}: bce={final:.4f}")
    return weights


def combine_predictions(predictions, weights: StackingWeights) -> np.ndarray:
    """(M, N, T) member predictions combined per step -> (N, T)"""
    predictions = np.asarray(predictions, dtype=np.float64)
    T = predictions.shape[-1]
    rows = weights.rows(T)  # (T, M)
    if weights.parametrization == "softmax":
        return np.einsum("mnt,tm->nt", predictions, rows)
    logits = np.einsum("mnt,tm->nt", _logits(predictions), rows) + weights.bias_rows(T)
    return stable_sigmoid(logits)


def stacked_predict(pool: ModelPool, weights: StackingWeights, x) -> np.ndarray:
    return combine_predictions(pool.predict(x), weights)
