"""
Temporal Conditional Shift generator
Equal-length binary sequence datasets whose feature-to-label law drifts along
the sequence through a bounded random walk on the generating weights.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, Field, model_validator

from ..diffcore import stable_sigmoid
from ..errors import GenerationError

logger = logging.getLogger(__name__)

# Independent random streams derived from ShiftConfig.seed
WEIGHT_STREAM = 0
FEATURE_STREAM = 1


class ShiftConfig(BaseModel):
    delta: float = Field(default=0.0, ge=0.0)
    d: int = Field(default=3, ge=1)
    l: int = Field(default=10, ge=1)
    T: int = Field(default=48, ge=1)
    n_train: int = Field(default=5000, ge=1)
    n_test: int = Field(default=1000, ge=1)
    r: float = Field(default=0.25, gt=0.0, lt=1.0)
    sparsity: float = Field(default=0.5, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    validation_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    threshold_scope: Literal["split", "train"] = "split"

    @model_validator(mode="after")
    def _window_fits_sequence(self):
        if self.l > self.T:
            raise ValueError(f"history window l={self.l} exceeds sequence length T={self.T}")
        return self


@dataclass
class ShiftWeights:
    w_l: np.ndarray  # (T, l), applied to x_{t-l} .. x_{t-1}
    w_d: np.ndarray  # (T, d)


@dataclass
class SequenceInstance:
    x: np.ndarray  # (T, d)
    y: np.ndarray  # (T,) in {0, 1}
    static: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class Dataset:
    train: list[SequenceInstance]
    validation: list[SequenceInstance]
    test: list[SequenceInstance]
    config: ShiftConfig
    weights: ShiftWeights
    thresholds: dict[str, float]
    n_classes: int = 2

    def split(self, name: str) -> list[SequenceInstance]:
        if name not in ("train", "validation", "test"):
            raise KeyError(f"unknown split '{name}'")
        return getattr(self, name)

    def arrays(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """Stack a split into X (N, T, d) and Y (N, T)"""
        instances = self.split(name)
        if not instances:
            T, d = self.config.T, self.config.d
            return np.zeros((0, T, d)), np.zeros((0, T))
        X = np.stack([s.x for s in instances])
        Y = np.stack([s.y for s in instances]).astype(np.float64)
        return X, Y

    def positive_ratio(self, name: str) -> float:
        _, Y = self.arrays(name)
        return float(Y.mean()) if Y.size else float("nan")


def generate_shift_weights(config: ShiftConfig) -> ShiftWeights:
    """w_t = w_{t-1} + Uniform(-delta, delta) increments from a standard-normal start"""
    rng = np.random.default_rng([config.seed, WEIGHT_STREAM])
    T, l, d = config.T, config.l, config.d

    w_l = np.empty((T, l))
    w_d = np.empty((T, d))
    w_l[0] = rng.standard_normal(l)
    w_d[0] = rng.standard_normal(d)
    for t in range(1, T):
        w_l[t] = w_l[t - 1] + rng.uniform(-config.delta, config.delta, size=l)
        w_d[t] = w_d[t - 1] + rng.uniform(-config.delta, config.delta, size=d)

    return ShiftWeights(w_l=w_l, w_d=w_d)


def sample_features(config: ShiftConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sparse inputs: Bernoulli(sparsity) mask times standard normals, (n, T, d)"""
    shape = (n, config.T, config.d)
    mask = rng.random(shape) < config.sparsity
    return mask * rng.standard_normal(shape)


def compute_scores(x: np.ndarray, weights: ShiftWeights) -> np.ndarray:
    """sigma(w_l_t^T [x_{t-l}, ..., x_{t-1}] w_d_t) with zero padding before t=0, (n, T)"""
    n, T, d = x.shape
    l = weights.w_l.shape[1]
    padded = np.concatenate([np.zeros((n, l, d)), x], axis=1)
    # windows[:, t] holds x_{t-l} .. x_{t-1}, shape (n, T, d, l)
    windows = sliding_window_view(padded, l, axis=1)[:, :T]
    raw = np.einsum("ntdl,tl,td->nt", windows, weights.w_l, weights.w_d)
    return stable_sigmoid(raw)


def label_threshold(scores: np.ndarray, r: float) -> float:
    """Empirical (1 - r)-quantile of the scores"""
    flat = scores.reshape(-1)
    if flat.size == 0 or np.all(flat == flat[0]):
        value = flat[0] if flat.size else float("nan")
        raise GenerationError(
            f"all {flat.size} raw scores are equal ({value}); cannot place a label threshold. "
            "Check sparsity > 0 and that the shift weights are non-degenerate"
        )
    return float(np.quantile(flat, 1.0 - r))


def relabel(x: np.ndarray, weights: ShiftWeights, threshold: float) -> np.ndarray:
    """Labels implied by stored features, weights and threshold"""
    return (compute_scores(x, weights) > threshold).astype(np.int8)


def _instances(x: np.ndarray, y: np.ndarray) -> list[SequenceInstance]:
    return [SequenceInstance(x=x[i], y=y[i]) for i in range(x.shape[0])]


def generate_dataset(config: ShiftConfig) -> Dataset:
    """Generate train / validation / test splits for one shift configuration"""
    weights = generate_shift_weights(config)
    rng = np.random.default_rng([config.seed, FEATURE_STREAM])

    pool_x = sample_features(config, config.n_train, rng)
    test_x = sample_features(config, config.n_test, rng)
    pool_scores = compute_scores(pool_x, weights)
    test_scores = compute_scores(test_x, weights)

    n_val = int(round(config.validation_fraction * config.n_train))
    n_fit = config.n_train - n_val
    if n_fit < 1:
        raise GenerationError(f"n_train={config.n_train} leaves no training sequences after validation split")

    split_scores = {
        "train": pool_scores[:n_fit],
        "validation": pool_scores[n_fit:],
        "test": test_scores,
    }
    if config.threshold_scope == "train":
        shared = label_threshold(pool_scores, config.r)
        thresholds = {name: shared for name in split_scores}
    else:
        thresholds = {
            name: label_threshold(scores, config.r)
            for name, scores in split_scores.items()
            if scores.size
        }

    labels = {name: (scores > thresholds[name]).astype(np.int8) for name, scores in split_scores.items() if scores.size}
    dataset = Dataset(
        train=_instances(pool_x[:n_fit], labels["train"]),
        validation=_instances(pool_x[n_fit:], labels["validation"]) if n_val else [],
        test=_instances(test_x, labels["test"]),
        config=config,
        weights=weights,
        thresholds=thresholds,
    )

    for name in ("train", "validation", "test"):
        ratio = dataset.positive_ratio(name)
        if not np.isnan(ratio) and abs(ratio - config.r) > 0.01:
            logger.warning(f"[DATAGEN] {name} positive ratio {ratio:.4f} is more than 0.01 away from r={config.r}")

    logger.info(
        f"[DATAGEN] delta={config.delta} seed={config.seed}: "
        f"{len(dataset.train)}/{len(dataset.validation)}/{len(dataset.test)} train/val/test sequences, "
        f"T={config.T}, d={config.d}, l={config.l}"
    )
    return dataset
