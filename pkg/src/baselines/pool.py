"""
Model Pool - independently BCE-trained LSTMs shared by every baseline ensemble
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..datagen import Dataset
from ..errors import ConfigurationError
from ..maes import (
    PROB_FLOOR,
    BestTracker,
    TrainConfig,
    TrainingHistory,
    bce_loss,
    require_data,
    run_phase,
)
from ..metrics import mean_apr_or_nan
from ..seqmodels import ExpertSpec, LstmExpert
from ..utils import derive_seed

logger = logging.getLogger(__name__)

POOL_KEY = 30_000
SHUFFLE_KEY = 30_001


@dataclass
class PoolMember:
    spec: ExpertSpec
    seed: int
    val_step_losses: np.ndarray  # (T,)
    val_predictions: np.ndarray | None  # (N_val, T)
    val_apr: float = float("nan")
    expert: LstmExpert | None = None
    history: TrainingHistory = field(default_factory=TrainingHistory)

    def predict(self, x) -> np.ndarray:
        if self.expert is None:
            raise ConfigurationError("pool member has no trained parameters")
        return self.expert.predict(x)


@dataclass
class ModelPool:
    members: list[PoolMember]

    def __len__(self) -> int:
        return len(self.members)

    @property
    def specs(self) -> list[ExpertSpec]:
        return [m.spec for m in self.members]

    def predict(self, x) -> np.ndarray:
        """(M, N, T) predictions of every member"""
        return np.stack([member.predict(x) for member in self.members])

    def val_step_losses(self) -> np.ndarray:
        """(M, T)"""
        return np.stack([m.val_step_losses for m in self.members])

    def val_predictions(self) -> np.ndarray | None:
        """(M, N_val, T), or None when any member lacks validation predictions"""
        if any(m.val_predictions is None for m in self.members):
            return None
        return np.stack([m.val_predictions for m in self.members])

    def subset(self, indices) -> "ModelPool":
        return ModelPool(members=[self.members[i] for i in indices])


def stepwise_validation_loss(predictions, labels) -> np.ndarray:
    """Mean BCE over sequences at every step: (N, T), (N, T) -> (T,)"""
    p = np.clip(np.asarray(predictions, dtype=np.float64), PROB_FLOOR, 1.0 - PROB_FLOOR)
    y = np.asarray(labels, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean(axis=0)


def train_expert(spec: ExpertSpec, dataset: Dataset, config: TrainConfig,
                 seed: int) -> tuple[LstmExpert, TrainingHistory]:
    """One LSTM trained with BCE; the best-on-validation parameters are kept"""
    train = dataset.arrays("train")
    validation = dataset.arrays("validation")
    require_data(train[0], validation[0])

    expert = LstmExpert(spec, input_dim=train[0].shape[-1], seed=seed)
    tracker = BestTracker(config.selection_metric)
    history = TrainingHistory()

    def loss_fn(xb, yb):
        return bce_loss(expert.forward(xb), yb)

    run_phase(
        "bce", expert.params, expert.params.names(), loss_fn, expert.predict,
        train, validation, config.epochs, config.batch_size, config.learning_rate,
        np.random.default_rng(derive_seed(seed, SHUFFLE_KEY)), tracker, history,
        tag=f"[POOL] h={spec.hidden_dim}",
    )
    tracker.restore(expert.params)
    return expert, history


def train_pool(specs: list[ExpertSpec], dataset: Dataset, config: TrainConfig,
               seeds: list[int] | None = None, parallelism: int = 1) -> ModelPool:
    """Train every spec independently; members keep their per-step validation losses"""
    if not specs:
        raise ConfigurationError("pool needs at least one expert spec")
    if seeds is None:
        seeds = [derive_seed(config.seed, POOL_KEY, m) for m in range(len(specs))]
    if len(seeds) != len(specs):
        raise ConfigurationError(f"got {len(seeds)} seeds for {len(specs)} specs")

    X_val, Y_val = dataset.arrays("validation")

    def build(index: int) -> PoolMember:
        spec, seed = specs[index], seeds[index]
        expert, history = train_expert(spec, dataset, config, seed)
        predictions = expert.predict(X_val)
        val_apr = mean_apr_or_nan(predictions, Y_val)
        member = PoolMember(
            spec=spec,
            seed=seed,
            val_step_losses=stepwise_validation_loss(predictions, Y_val),
            val_predictions=predictions,
            val_apr=val_apr,
            expert=expert,
            history=history,
        )
        logger.info(
            f"[POOL] member {index} (h={spec.hidden_dim}, seed={seed}): "
            f"val_apr={val_apr:.4f}"
        )
        return member

    logger.info(f"[POOL] training {len(specs)} LSTMs with parallelism={parallelism}")
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as executor:
            members = list(executor.map(build, range(len(specs))))
    else:
        members = [build(i) for i in range(len(specs))]
    return ModelPool(members=members)
