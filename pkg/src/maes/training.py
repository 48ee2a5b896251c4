"""
Training loop - minibatch Adam phases with best-on-validation model saving
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from pydantic import BaseModel, Field

from ..datagen import Dataset
from ..diffcore import ParamSet, Tensor, adam_step, backward, create_adam_state, no_grad
from ..errors import TrainingError
from ..metrics import mean_apr_or_nan
from ..utils import derive_seed
from .config import EnsembleSpec, TrainConfig
from .losses import bce_loss, maes_loss, total_loss
from .model import MaesModel, maes_forward

logger = logging.getLogger(__name__)

SHUFFLE_KEY = 20_000

LossFn = Callable[[np.ndarray, np.ndarray], Tensor]
PredictFn = Callable[[np.ndarray], np.ndarray]


class EpochRecord(BaseModel):
    phase: str
    epoch: int
    train_loss: float
    val_loss: float
    val_apr: float | None = None


class TrainingHistory(BaseModel):
    records: list[EpochRecord] = Field(default_factory=list)
    best_epoch: int | None = None
    best_score: float | None = None
    provenance: dict | None = None

    def to_jsonl(self, provenance: dict | None = None) -> str:
        """Header line with the provenance, then one record per epoch"""
        provenance = provenance if provenance is not None else self.provenance
        lines = [json.dumps({"header": {"provenance": provenance or {}}}, sort_keys=True)]
        lines += [json.dumps(record.model_dump(), sort_keys=True) for record in self.records]
        return "\n".join(lines) + "\n"

    def val_aprs(self) -> list[float]:
        return [math.nan if r.val_apr is None else r.val_apr for r in self.records]


class BestTracker:
    """Keeps a snapshot of the parameters with the best validation score seen so far"""

    def __init__(self, metric: str = "apr"):
        self.metric = metric
        self.best_score = -math.inf
        self.best_epoch: int | None = None
        self._snapshot: dict[str, np.ndarray] | None = None

    def score(self, val_apr: float, val_loss: float) -> float:
        value = val_apr if self.metric == "apr" else -val_loss
        return value if np.isfinite(value) else -math.inf

    def update(self, epoch: int, val_apr: float, val_loss: float, params: ParamSet) -> bool:
        score = self.score(val_apr, val_loss)
        if self._snapshot is not None and score <= self.best_score:
            return False
        self.best_score = score
        self.best_epoch = epoch
        self._snapshot = params.snapshot()
        return True

    def restore(self, params: ParamSet) -> None:
        if self._snapshot is not None:
            params.restore(self._snapshot)


def iterate_batches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Shuffled whole-sequence minibatches; the last one may be short"""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def require_data(X: np.ndarray, X_val: np.ndarray) -> None:
    if X.shape[0] == 0:
        raise TrainingError("training split is empty")
    if X_val.shape[0] == 0:
        raise TrainingError("validation split is empty; best-model saving needs validation data")


def validation_loss(loss_fn: LossFn, X: np.ndarray, Y: np.ndarray, batch_size: int) -> float:
    """Per-sequence loss over consecutive batches of ``batch_size``"""
    total = 0.0
    with no_grad():
        for start in range(0, X.shape[0], batch_size):
            total += loss_fn(X[start:start + batch_size], Y[start:start + batch_size]).item()
    return total / X.shape[0]


def run_phase(phase: str, params: ParamSet, names: list[str], loss_fn: LossFn, predict_fn: PredictFn,
              train: tuple[np.ndarray, np.ndarray], validation: tuple[np.ndarray, np.ndarray],
              epochs: int, batch_size: int, learning_rate: float, rng: np.random.Generator,
              tracker: BestTracker, history: TrainingHistory, first_epoch: int = 1,
              tag: str = "[MAES]") -> int:
    """Run ``epochs`` epochs of Adam on ``names``; returns the next epoch number.

    ``loss_fn`` returns the summed loss of a batch; the optimised objective is
    that sum divided by the batch size. Validation loss is summed over batches of
    the same size and reported per sequence.
    """
    X, Y = train
    X_val, Y_val = validation
    optimizer = create_adam_state(params, names, learning_rate=learning_rate)

    epoch = first_epoch
    for _ in range(epochs):
        running, seen = 0.0, 0
        for batch_index, rows in enumerate(iterate_batches(X.shape[0], batch_size, rng)):
            params.zero_grad()
            loss = loss_fn(X[rows], Y[rows]) / float(len(rows))
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingError(f"{phase} loss is {value}", epoch=epoch, batch=batch_index)
            backward(loss)
            adam_step(params, optimizer)
            running += value * len(rows)
            seen += len(rows)
            logger.debug(f"{tag} {phase} epoch {epoch} batch {batch_index}: loss={value:.6f}")

        val_loss = validation_loss(loss_fn, X_val, Y_val, batch_size)
        val_apr = mean_apr_or_nan(predict_fn(X_val), Y_val)
        record = EpochRecord(
            phase=phase,
            epoch=epoch,
            train_loss=running / seen,
            val_loss=val_loss,
            val_apr=None if np.isnan(val_apr) else val_apr,
        )
        history.records.append(record)
        improved = tracker.update(epoch, val_apr, val_loss, params)
        logger.info(
            f"{tag} {phase} epoch {epoch}: train_loss={record.train_loss:.4f} "
            f"val_loss={val_loss:.4f} val_apr={val_apr:.4f}{' *' if improved else ''}"
        )
        epoch += 1

    history.best_epoch = tracker.best_epoch
    history.best_score = tracker.best_score if tracker.best_epoch is not None else None
    return epoch


@dataclass
class TrainedMaes:
    model: MaesModel
    config: TrainConfig
    history: TrainingHistory

    def predict(self, x) -> np.ndarray:
        return maes_forward(self.model, x)[0]


def train_maes(spec: EnsembleSpec, dataset: Dataset, config: TrainConfig) -> TrainedMaes:
    """Optional independent BCE pre-training of the experts, then joint training of the whole ensemble"""
    train = dataset.arrays("train")
    validation = dataset.arrays("validation")
    require_data(train[0], validation[0])

    model = MaesModel(spec, input_dim=train[0].shape[-1], seed=config.seed)
    rng = np.random.default_rng(derive_seed(config.seed, SHUFFLE_KEY))
    tracker = BestTracker(config.selection_metric)
    history = TrainingHistory()

    def predict(x):
        return maes_forward(model, x)[0]

    def pretrain_loss(xb, yb):
        losses = [bce_loss(expert.forward(xb), yb) for expert in model.experts]
        total = losses[0]
        for loss in losses[1:]:
            total = total + loss
        return total

    def joint_loss(xb, yb):
        out = model.forward(xb)
        if config.loss_kind == "maes":
            loss = maes_loss(out.expert_preds, out.alpha, yb, log_alpha=out.log_alpha)
        else:
            loss = bce_loss(out.ensemble, yb)
        return total_loss(loss, out.alpha, config.w_imp, config.importance_kind)

    logger.info(
        f"[MAES] training M={spec.n_experts} ({spec.attention_kind.value} attention, {config.loss_kind} loss, "
        f"w_imp={config.w_imp}) for {config.pretrain_epochs}+{config.joint_epochs} epochs"
    )

    epoch = 1
    if config.pretrain_epochs:
        epoch = run_phase(
            "pretrain", model.params, model.expert_param_names(), pretrain_loss, predict,
            train, validation, config.pretrain_epochs, config.batch_size, config.learning_rate,
            rng, tracker, history, first_epoch=epoch,
        )
    if config.joint_epochs:
        run_phase(
            "joint", model.params, model.params.names(), joint_loss, predict,
            train, validation, config.joint_epochs, config.batch_size, config.learning_rate,
            rng, tracker, history, first_epoch=epoch,
        )

    tracker.restore(model.params)
    if tracker.best_epoch is not None:
        logger.info(f"[MAES] restored epoch {tracker.best_epoch} (score {tracker.best_score:.4f})")
    return TrainedMaes(model=model, config=config, history=history)
