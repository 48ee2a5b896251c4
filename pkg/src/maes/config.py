"""
MAES configuration models
"""

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from ..gate import AttentionKind
from ..seqmodels import ExpertSpec


class EnsembleSpec(BaseModel):
    expert_specs: list[ExpertSpec] = Field(min_length=1)
    context_hidden_dim: int = Field(default=32, ge=1)
    encoding_dim: int = Field(default=32, ge=1)
    attention_kind: AttentionKind = AttentionKind.ADDITIVE
    attention_dim: int = Field(default=32, ge=1)

    @model_validator(mode="after")
    def _dot_dimensions(self):
        if self.attention_kind is AttentionKind.DOT and self.encoding_dim != self.context_hidden_dim:
            raise ValueError(
                f"dot attention needs encoding_dim == context_hidden_dim, "
                f"got {self.encoding_dim} and {self.context_hidden_dim}"
            )
        return self

    @property
    def n_experts(self) -> int:
        return len(self.expert_specs)


class TrainConfig(BaseModel):
    epochs: int = Field(default=15, ge=0)
    batch_size: int = Field(default=100, ge=1)
    learning_rate: float = Field(default=0.001, ge=0.0)
    w_imp: float = Field(default=0.0, ge=0.0)
    pretrain_epochs: int = Field(default=0, ge=0)
    loss_kind: Literal["maes", "bce"] = "maes"
    importance_kind: Literal["printed", "cv"] = "printed"
    selection_metric: Literal["apr", "loss"] = "apr"
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _pretraining_fits(self):
        if self.pretrain_epochs > self.epochs:
            raise ValueError(f"pretrain_epochs={self.pretrain_epochs} exceeds epochs={self.epochs}")
        return self

    @property
    def joint_epochs(self) -> int:
        return self.epochs - self.pretrain_epochs
