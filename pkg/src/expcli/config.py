"""
Experiment configuration - one declarative JSON document per experiment
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..baselines import StackingConfig
from ..datagen import ShiftConfig
from ..errors import ConfigurationError
from ..gate import AttentionKind
from ..maes import TrainConfig

logger = logging.getLogger(__name__)

ROSTER = (
    "best_single",
    "stepwise_select",
    "average",
    "stacking_global",
    "stacking_stepwise",
    "maes",
    "maes_hard",
)
BASELINES = ROSTER[:5]

SEARCH_GRID = [*range(10, 1100, 20), 1100]

# Settings that don't change results stay out of the hash
HASH_EXCLUDE = {"output_dir", "parallelism"}


class PoolConfig(BaseModel):
    size: int = Field(default=20, ge=1)
    hidden_low: int = Field(default=100, ge=1)
    hidden_high: int = Field(default=1100, ge=1)
    cell_variant: Literal["standard", "paper-sigma"] = "standard"
    train: TrainConfig = Field(default_factory=TrainConfig)

    @model_validator(mode="after")
    def _range_is_ordered(self):
        if self.hidden_low > self.hidden_high:
            raise ValueError(f"hidden_low={self.hidden_low} exceeds hidden_high={self.hidden_high}")
        return self


class MaesConfig(BaseModel):
    n_experts: int = Field(default=5, ge=1)
    context_hidden_dim: int = Field(default=32, ge=1)
    encoding_dim: int = Field(default=32, ge=1)
    attention_dim: int = Field(default=32, ge=1)
    attention_kind: AttentionKind = AttentionKind.ADDITIVE
    train: TrainConfig = Field(default_factory=TrainConfig)


class AblationConfig(BaseModel):
    delta: float = Field(default=0.2, ge=0.0)
    w_imp: list[float] = Field(default_factory=lambda: [round(0.1 * i, 1) for i in range(11)])
    pretrain_epochs: list[int] = Field(default_factory=lambda: list(range(16)))
    attention_kinds: list[AttentionKind] = Field(default_factory=lambda: list(AttentionKind))
    n_experts: list[int] = Field(default_factory=lambda: [1, 2, 3, 5, 10])
    search_samples: int = Field(default=0, ge=0)


class SearchConfig(BaseModel):
    n_samples: int = Field(default=20, ge=1)
    grid: list[int] = Field(default_factory=lambda: list(SEARCH_GRID))
    attention_kind: AttentionKind = AttentionKind.ADDITIVE
    evaluate: bool = False

    @field_validator("grid")
    @classmethod
    def _grid_not_empty(cls, grid):
        if not grid or min(grid) < 1:
            raise ValueError("search grid needs at least one positive value")
        return grid


class ExperimentConfig(BaseModel):
    name: str = "experiment"
    data: ShiftConfig = Field(default_factory=ShiftConfig)
    deltas: list[float] = Field(default_factory=lambda: [0.0], min_length=1)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    roster: list[str] = Field(default_factory=lambda: list(ROSTER))
    pool: PoolConfig = Field(default_factory=PoolConfig)
    maes: MaesConfig = Field(default_factory=MaesConfig)
    stacking: StackingConfig = Field(default_factory=StackingConfig)
    ablation: AblationConfig = Field(default_factory=AblationConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    n_perm: int = Field(default=10_000, ge=1)
    trace_sequence: int = Field(default=0, ge=0)
    output_dir: str = "runs"
    parallelism: int = Field(default=1, ge=1)

    @field_validator("deltas")
    @classmethod
    def _deltas_non_negative(cls, deltas):
        if any(d < 0 for d in deltas):
            raise ValueError(f"deltas must be non-negative, got {deltas}")
        return deltas

    @field_validator("roster")
    @classmethod
    def _known_models(cls, roster):
        unknown = [name for name in roster if name not in ROSTER]
        if unknown:
            raise ValueError(f"unknown roster entries {unknown}; available: {', '.join(ROSTER)}")
        return roster

    @model_validator(mode="after")
    def _grids_fit_training(self):
        too_long = [p for p in self.ablation.pretrain_epochs if p > self.maes.train.epochs]
        if too_long:
            raise ValueError(
                f"ablation pretrain_epochs {too_long} exceed maes.train.epochs={self.maes.train.epochs}"
            )
        if self.maes.attention_kind is AttentionKind.DOT and self.maes.encoding_dim != self.maes.context_hidden_dim:
            raise ValueError("dot attention needs maes.encoding_dim == maes.context_hidden_dim")
        return self

    def config_hash(self) -> str:
        payload = self.model_dump(mode="json", exclude=HASH_EXCLUDE)
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()

    def provenance(self) -> dict:
        return {"config_hash": self.config_hash(), "seeds": list(self.seeds)}

    def artifact_path(self, *parts) -> Path:
        """Path under the output directory; anything resolving outside it is rejected"""
        root = Path(self.output_dir).resolve()
        path = root.joinpath(*[str(p) for p in parts]).resolve()
        if path != root and root not in path.parents:
            raise ConfigurationError(f"artifact path {path} escapes the output directory {root}")
        return path


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} not found")
    try:
        return ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as error:
        raise ConfigurationError(f"invalid config {path}:\n{error}") from error


def save_config(config: ExperimentConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
